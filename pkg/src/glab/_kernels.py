"""Hot numeric kernels: bitmask DP, subset branch-and-bound, MST, local-search scans.

Each kernel has a numba ``*_nb`` build and a pure-numpy ``*_py`` fallback; the
module-level names dispatch on the backend selected in ``_compat`` (env var
``GLAB_NUMBA``).  Both builds implement identical semantics, including
tie-breaking, so results are backend-independent.
"""

from __future__ import annotations

import numpy as np

from ._compat import NUMBA_ENABLED, maybe_njit

INF = np.inf


# ---------------------------------------------------------------------------
# lexicographic subset comparison: m1 precedes m2 iff, at the lowest differing
# bit, m1 has that bit set (sorted-index-tuple order for positive masses).
# ---------------------------------------------------------------------------


@maybe_njit(nogil=True)
def _lex_smaller(m1: np.int64, m2: np.int64) -> bool:
    diff = m1 ^ m2
    if diff == 0:
        return False
    low = diff & (-diff)
    return (m1 & low) != 0


# ---------------------------------------------------------------------------
# Prim MST length (O(n^2)), with optional anchor rows appended
# ---------------------------------------------------------------------------


@maybe_njit(nogil=True)
def prim_length_nb(pts: np.ndarray) -> float:
    n = pts.shape[0]
    if n <= 1:
        return 0.0
    d = pts.shape[1]
    in_tree = np.zeros(n, np.bool_)
    dist = np.full(n, INF)
    in_tree[0] = True
    for j in range(1, n):
        s = 0.0
        for c in range(d):
            t = pts[j, c] - pts[0, c]
            s += t * t
        dist[j] = np.sqrt(s)
    total = 0.0
    for _ in range(n - 1):
        best = -1
        bd = INF
        for j in range(n):
            if not in_tree[j] and dist[j] < bd:
                bd = dist[j]
                best = j
        total += bd
        in_tree[best] = True
        for j in range(n):
            if not in_tree[j]:
                s = 0.0
                for c in range(d):
                    t = pts[j, c] - pts[best, c]
                    s += t * t
                nd = np.sqrt(s)
                if nd < dist[j]:
                    dist[j] = nd
    return total


def prim_length_py(pts: np.ndarray) -> float:
    n = pts.shape[0]
    if n <= 1:
        return 0.0
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    dist = np.linalg.norm(pts - pts[0], axis=1)
    dist[0] = INF
    total = 0.0
    for _ in range(n - 1):
        j = int(np.argmin(np.where(in_tree, INF, dist)))
        total += dist[j]
        in_tree[j] = True
        nd = np.linalg.norm(pts - pts[j], axis=1)
        keep = nd < dist
        dist = np.where(keep & ~in_tree, nd, dist)
    return float(total)


# ---------------------------------------------------------------------------
# Held-Karp bitmask DP for budgeted paths over candidate atoms
# ---------------------------------------------------------------------------


@maybe_njit(nogil=True)
def held_karp_nb(dist0, dmat, dist1, masses, ell, directed):
    """Best collectable mass over atom subsets reachable within the budget.

    dist0[j]: start->atom j, dmat: atom->atom, dist1[j]: atom j->end (ignored
    when not directed).  Returns (value, subset mask, last atom, parent table);
    mask 0 / last -1 encode the empty path.  Ties prefer the lexicographically
    smallest subset, then the shortest realization.
    """
    n = dist0.shape[0]
    size = 1 << n
    dp = np.full((size, n), INF)
    parent = np.full((size, n), -1, np.int16)
    mask_mass = np.zeros(size)
    for m in range(1, size):
        low = m & (-m)
        j = 0
        while (low >> j) & 1 == 0:
            j += 1
        mask_mass[m] = mask_mass[m ^ low] + masses[j]
    for j in range(n):
        if dist0[j] <= ell:
            dp[1 << j, j] = dist0[j]
    best_val = 0.0
    best_mask = 0
    best_last = -1
    for m in range(1, size):
        closed_min = INF
        jmin = -1
        for j in range(n):
            if (m >> j) & 1 == 0:
                continue
            cur = dp[m, j]
            if cur == INF:
                continue
            closed = cur + (dist1[j] if directed else 0.0)
            if closed < closed_min:
                closed_min = closed
                jmin = j
            for k in range(n):
                if (m >> k) & 1:
                    continue
                nd = cur + dmat[j, k]
                if nd > ell:
                    continue
                nm = m | (1 << k)
                if nd < dp[nm, k]:
                    dp[nm, k] = nd
                    parent[nm, k] = j
        if jmin >= 0 and closed_min <= ell:
            val = mask_mass[m]
            if val > best_val or (val == best_val and _lex_smaller(m, best_mask)):
                best_val = val
                best_mask = m
                best_last = jmin
    return best_val, best_mask, best_last, parent


def held_karp_py(dist0, dmat, dist1, masses, ell, directed):
    n = dist0.shape[0]
    size = 1 << n
    dp = np.full((size, n), INF)
    parent = np.full((size, n), -1, np.int16)
    mask_mass = np.zeros(size)
    for m in range(1, size):
        low = m & (-m)
        mask_mass[m] = mask_mass[m ^ low] + masses[low.bit_length() - 1]
    reach0 = dist0 <= ell
    for j in np.nonzero(reach0)[0]:
        dp[1 << j, j] = dist0[j]
    close = dist1 if directed else np.zeros(n)
    best_val, best_mask, best_last = 0.0, 0, -1
    for m in range(1, size):
        row = dp[m]
        if not np.isfinite(row).any():
            continue
        closed = row + close
        jmin = int(np.argmin(closed))
        if closed[jmin] <= ell:
            val = mask_mass[m]
            if val > best_val or (val == best_val and _lex_smaller(m, best_mask)):
                best_val, best_mask, best_last = val, m, jmin
        nd = row[:, None] + dmat
        best_from = nd.min(axis=0)
        arg_from = nd.argmin(axis=0)
        for k in range(n):
            if (m >> k) & 1:
                continue
            v = best_from[k]
            if v <= ell:
                nm = m | (1 << k)
                if v < dp[nm, k]:
                    dp[nm, k] = v
                    parent[nm, k] = arg_from[k]
    return best_val, best_mask, best_last, parent


def reconstruct_order(mask: int, last: int, parent: np.ndarray) -> list[int]:
    """Atom visit order from a Held-Karp parent table."""
    order = []
    m, j = int(mask), int(last)
    while j >= 0:
        order.append(j)
        pj = int(parent[m, j])
        m ^= 1 << j
        j = pj
    order.reverse()
    return order


# ---------------------------------------------------------------------------
# Subset branch-and-bound for restricted animals (and the relaxed upper bound)
# ---------------------------------------------------------------------------


@maybe_njit(nogil=True)
def _anchored_prim(pts, chosen, n_chosen, anchors, n_anchors, scratch):
    k = 0
    for t in range(n_chosen):
        for c in range(pts.shape[1]):
            scratch[k, c] = pts[chosen[t], c]
        k += 1
    for a in range(n_anchors):
        for c in range(pts.shape[1]):
            scratch[k, c] = anchors[a, c]
        k += 1
    return prim_length_nb(scratch[:k])


@maybe_njit(nogil=True)
def restricted_bnb_nb(pts, masses, anchors, n_anchors, ell, relax_rho):
    """DFS over atom subsets with remaining-mass and connection-cost pruning.

    relax_rho <= 0: exact restricted feasibility MST(S) + sum of anchor gaps.
    relax_rho > 0: relaxed feasibility relax_rho * MST(S with anchors), a safe
    upper-bound test for animals that may use free junction vertices.
    Returns (best mass, best subset mask); the empty subset scores 0.
    """
    n = pts.shape[0]
    d = pts.shape[1]
    if n == 0:
        return 0.0, np.int64(0)
    suffix = np.zeros(n + 1)
    for i in range(n - 1, -1, -1):
        suffix[i] = suffix[i + 1] + masses[i]
    scratch = np.empty((n + 2, d))
    subset_pts = np.empty((n, d))
    chosen = np.zeros(n, np.int64)
    phase = np.zeros(n, np.int8)
    n_chosen = 0
    cur_mass = 0.0
    mask = np.int64(0)
    best_val = 0.0
    best_mask = np.int64(0)
    i = 0
    while i >= 0:
        if i == n:
            i -= 1
            continue
        p = phase[i]
        if p == 0:
            if cur_mass + suffix[i] <= best_val:
                i -= 1
                continue
            phase[i] = 1
            chosen[n_chosen] = i
            n_chosen += 1
            cur_mass += masses[i]
            mask |= np.int64(1) << i
            anchored = _anchored_prim(pts, chosen, n_chosen, anchors, n_anchors, scratch)
            if relax_rho > 0.0:
                cost = relax_rho * anchored
                lower = 0.5 * cost
            else:
                for t in range(n_chosen):
                    for c in range(d):
                        subset_pts[t, c] = pts[chosen[t], c]
                cost = prim_length_nb(subset_pts[:n_chosen])
                for a in range(n_anchors):
                    gap = INF
                    for t in range(n_chosen):
                        s = 0.0
                        for c in range(d):
                            tt = pts[chosen[t], c] - anchors[a, c]
                            s += tt * tt
                        g = np.sqrt(s)
                        if g < gap:
                            gap = g
                    cost += gap
                lower = 0.5 * anchored
            if cost <= ell and cur_mass > best_val:
                best_val = cur_mass
                best_mask = mask
            if lower > ell:
                n_chosen -= 1
                cur_mass -= masses[i]
                mask &= ~(np.int64(1) << i)
                phase[i] = 2
                i += 1
                continue
            i += 1
            continue
        if p == 1:
            n_chosen -= 1
            cur_mass -= masses[i]
            mask &= ~(np.int64(1) << i)
            phase[i] = 2
            i += 1
            continue
        phase[i] = 0
        i -= 1
    return best_val, best_mask


def restricted_bnb_py(pts, masses, anchors, n_anchors, ell, relax_rho):
    n = pts.shape[0]
    if n == 0:
        return 0.0, 0
    anchors = anchors[:n_anchors]
    suffix = np.concatenate([np.cumsum(masses[::-1])[::-1], [0.0]])
    best = [0.0, 0]

    def evaluate(chosen, mask):
        sub = pts[chosen]
        anchored = prim_length_py(np.vstack([sub, anchors]))
        if relax_rho > 0.0:
            cost = relax_rho * anchored
            lower = 0.5 * cost
        else:
            cost = prim_length_py(sub)
            for a in anchors:
                cost += float(np.linalg.norm(sub - a, axis=1).min())
            lower = 0.5 * anchored
        if cost <= ell and sum(masses[j] for j in chosen) > best[0]:
            best[0] = float(sum(masses[j] for j in chosen))
            best[1] = mask
        return lower

    def dfs(i, chosen, mask, cur_mass):
        if cur_mass + suffix[i] <= best[0]:
            return
        if i == n:
            return
        chosen.append(i)
        lower = evaluate(chosen, mask | (1 << i))
        if lower <= ell:
            dfs(i + 1, chosen, mask | (1 << i), cur_mass + masses[i])
        chosen.pop()
        dfs(i + 1, chosen, mask, cur_mass)

    import sys

    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, n + 100))
    try:
        dfs(0, [], 0, 0.0)
    finally:
        sys.setrecursionlimit(old)
    return best[0], best[1]


# ---------------------------------------------------------------------------
# Path local-search scans
# ---------------------------------------------------------------------------


@maybe_njit(nogil=True)
def insertion_scan_nb(path, n_path, cand, used, cmass, ell, cur_len, directed):
    """Best feasible single-atom insertion by mass-per-added-length ratio.

    Returns (atom index, insertion slot, added length); slot t inserts between
    path vertices t and t+1, slot n_path-1 appends (one-endpoint form only).
    (-1, -1, 0.0) when nothing fits.
    """
    d = path.shape[1]
    n = cand.shape[0]
    best_j = -1
    best_t = -1
    best_delta = 0.0
    best_ratio = -1.0
    budget = ell - cur_len
    for j in range(n):
        if used[j]:
            continue
        for t in range(n_path if not directed else n_path - 1):
            s = 0.0
            for c in range(d):
                tt = cand[j, c] - path[t, c]
                s += tt * tt
            da = np.sqrt(s)
            if t == n_path - 1:
                delta = da
            else:
                s2 = 0.0
                s3 = 0.0
                for c in range(d):
                    t2 = cand[j, c] - path[t + 1, c]
                    s2 += t2 * t2
                    t3 = path[t, c] - path[t + 1, c]
                    s3 += t3 * t3
                delta = da + np.sqrt(s2) - np.sqrt(s3)
            if delta > budget:
                continue
            ratio = cmass[j] / (delta + 1e-12)
            if ratio > best_ratio:
                best_ratio = ratio
                best_j = j
                best_t = t
                best_delta = delta
    return best_j, best_t, best_delta


def insertion_scan_py(path, n_path, cand, used, cmass, ell, cur_len, directed):
    path = path[:n_path]
    free = ~used
    if not free.any():
        return -1, -1, 0.0
    idx = np.nonzero(free)[0]
    pts = cand[idx]
    d_to = np.linalg.norm(pts[:, None, :] - path[None, :, :], axis=2)  # (f, m)
    gaps = np.linalg.norm(np.diff(path, axis=0), axis=1)  # (m-1,)
    deltas = d_to[:, :-1] + d_to[:, 1:] - gaps[None, :]  # internal slots
    if not directed:
        deltas = np.hstack([deltas, d_to[:, -1:]])  # append slot
    budget = ell - cur_len
    feas = deltas <= budget
    if not feas.any():
        return -1, -1, 0.0
    ratio = np.where(feas, cmass[idx][:, None] / (deltas + 1e-12), -np.inf)
    flat = np.argmax(ratio)
    fj, t = np.unravel_index(flat, ratio.shape)
    return int(idx[fj]), int(t), float(deltas[fj, t])


@maybe_njit(nogil=True)
def two_opt_pass_nb(path, n_path, fixed_end):
    """One best-improvement 2-opt sweep in place; returns the length saved.

    Reverses interior segments; the first vertex (and the last, when
    ``fixed_end``) never moves.
    """
    d = path.shape[1]
    saved = 0.0
    improved = True
    while improved:
        improved = False
        hi = n_path - 1 if fixed_end else n_path
        for i in range(1, hi - 1):
            for j in range(i + 1, hi):
                s1 = 0.0
                s2 = 0.0
                s3 = 0.0
                s4 = 0.0
                for c in range(d):
                    t1 = path[i - 1, c] - path[j, c]
                    s1 += t1 * t1
                    t3 = path[i - 1, c] - path[i, c]
                    s3 += t3 * t3
                delta = np.sqrt(s1) - np.sqrt(s3)
                if j + 1 < n_path:
                    for c in range(d):
                        t2 = path[i, c] - path[j + 1, c]
                        s2 += t2 * t2
                        t4 = path[j, c] - path[j + 1, c]
                        s4 += t4 * t4
                    delta += np.sqrt(s2) - np.sqrt(s4)
                if delta < -1e-12:
                    lo, hh = i, j
                    while lo < hh:
                        for c in range(d):
                            tmp = path[lo, c]
                            path[lo, c] = path[hh, c]
                            path[hh, c] = tmp
                        lo += 1
                        hh -= 1
                    saved -= delta
                    improved = True
    return saved


def two_opt_pass_py(path, n_path, fixed_end):
    saved = 0.0
    improved = True
    while improved:
        improved = False
        hi = n_path - 1 if fixed_end else n_path
        for i in range(1, hi - 1):
            for j in range(i + 1, hi):
                delta = np.linalg.norm(path[i - 1] - path[j]) - np.linalg.norm(
                    path[i - 1] - path[i]
                )
                if j + 1 < n_path:
                    delta += np.linalg.norm(path[i] - path[j + 1]) - np.linalg.norm(
                        path[j] - path[j + 1]
                    )
                if delta < -1e-12:
                    path[i : j + 1] = path[i : j + 1][::-1].copy()
                    saved -= delta
                    improved = True
    return saved


# ---------------------------------------------------------------------------
# Greedy anchored-tree growth for animal lower bounds
# ---------------------------------------------------------------------------


@maybe_njit(nogil=True)
def tree_grow_nb(cand, cmass, allowed, anchors, n_anchors, ell):
    """Grow an anchored attachment tree greedily under the length budget.

    Each step inserts the allowed atom maximizing mass per added cost, where
    the cost change counts the attachment edge plus the induced reduction of
    the anchor gaps.  Returns (count, chosen ids, attachment parents, tree
    length); parents[k] == -1 for the root.
    """
    n = cand.shape[0]
    d = cand.shape[1]
    chosen = np.full(n, -1, np.int64)
    parents = np.full(n, -1, np.int64)
    attach = np.full(n, INF)
    attach_to = np.full(n, -1, np.int64)
    gaps = np.full(2, 0.0)
    anchor_d = np.empty((2, n))
    for a in range(n_anchors):
        for j in range(n):
            s = 0.0
            for c in range(d):
                t = cand[j, c] - anchors[a, c]
                s += t * t
            anchor_d[a, j] = np.sqrt(s)
        gaps[a] = INF
    in_tree = np.zeros(n, np.bool_)
    tree_len = 0.0
    count = 0
    while True:
        best_j = -1
        best_cost = 0.0
        best_ratio = -1.0
        for j in range(n):
            if in_tree[j] or not allowed[j]:
                continue
            if count == 0:
                cost = 0.0
                for a in range(n_anchors):
                    cost += anchor_d[a, j]
            else:
                cost = attach[j]
                for a in range(n_anchors):
                    if anchor_d[a, j] < gaps[a]:
                        cost += anchor_d[a, j] - gaps[a]
            total = tree_len
            for a in range(n_anchors):
                total += gaps[a] if gaps[a] != INF else 0.0
            if count == 0:
                new_total = cost
            else:
                new_total = total + cost
            if new_total > ell:
                continue
            denom = cost if cost > 1e-12 else 1e-12
            ratio = cmass[j] / denom
            if ratio > best_ratio:
                best_ratio = ratio
                best_j = j
                best_cost = cost
        if best_j < 0:
            break
        j = best_j
        in_tree[j] = True
        chosen[count] = j
        if count > 0:
            parents[count] = attach_to[j]
            tree_len += attach[j]
        for a in range(n_anchors):
            if anchor_d[a, j] < gaps[a]:
                gaps[a] = anchor_d[a, j]
        count += 1
        for k in range(n):
            if in_tree[k] or not allowed[k]:
                continue
            s = 0.0
            for c in range(d):
                t = cand[k, c] - cand[j, c]
                s += t * t
            nd = np.sqrt(s)
            if nd < attach[k]:
                attach[k] = nd
                attach_to[k] = j
        _ = best_cost
    return count, chosen, parents, tree_len


def tree_grow_py(cand, cmass, allowed, anchors, n_anchors, ell):
    n = cand.shape[0]
    chosen = np.full(n, -1, np.int64)
    parents = np.full(n, -1, np.int64)
    anchors = anchors[:n_anchors]
    anchor_d = (
        np.linalg.norm(cand[None, :, :] - anchors[:, None, :], axis=2)
        if n_anchors
        else np.zeros((0, n))
    )
    gaps = np.full(n_anchors, INF)
    attach = np.full(n, INF)
    attach_to = np.full(n, -1, np.int64)
    in_tree = np.zeros(n, dtype=bool)
    tree_len = 0.0
    count = 0
    while True:
        free = ~in_tree & allowed
        if not free.any():
            break
        if count == 0:
            cost = anchor_d[:, :].sum(axis=0) if n_anchors else np.zeros(n)
            new_total = cost
        else:
            red = np.zeros(n)
            for a in range(n_anchors):
                red += np.minimum(anchor_d[a] - gaps[a], 0.0)
            cost = attach + red
            new_total = tree_len + np.where(np.isfinite(gaps), gaps, 0.0).sum() + cost
        ok = free & (new_total <= ell)
        if not ok.any():
            break
        ratio = np.where(ok, cmass / np.maximum(cost, 1e-12), -np.inf)
        j = int(np.argmax(ratio))
        in_tree[j] = True
        chosen[count] = j
        if count > 0:
            parents[count] = attach_to[j]
            tree_len += float(attach[j])
        for a in range(n_anchors):
            gaps[a] = min(gaps[a], float(anchor_d[a, j]))
        count += 1
        nd = np.linalg.norm(cand - cand[j], axis=1)
        upd = nd < attach
        attach_to = np.where(upd, j, attach_to)
        attach = np.minimum(attach, nd)
    return count, chosen, parents, tree_len


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

if NUMBA_ENABLED:
    prim_length = prim_length_nb
    held_karp = held_karp_nb
    restricted_bnb = restricted_bnb_nb
    insertion_scan = insertion_scan_nb
    two_opt_pass = two_opt_pass_nb
    tree_grow = tree_grow_nb
else:  # pragma: no cover - exercised when GLAB_NUMBA=0
    prim_length = prim_length_py
    held_karp = held_karp_py
    restricted_bnb = restricted_bnb_py
    insertion_scan = insertion_scan_py
    two_opt_pass = two_opt_pass_py
    tree_grow = tree_grow_py

BACKEND = "numba" if NUMBA_ENABLED else "numpy"
