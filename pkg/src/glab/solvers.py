"""Value-function solvers: exact on small instances, brackets and heuristic
lower bounds elsewhere.

The path value is solved by a bitmask dynamic program over candidate atoms;
the restricted animal value by subset branch-and-bound with a minimum
spanning tree as the minimal connection.  Unrestricted and penalized animal
values are NP-hard to pin exactly (Euclidean Steiner topologies), so they are
bracketed: certified witnesses from explicit trees below, a Steiner-ratio
relaxation above.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels as K
from .errors import InfeasibleError, ParameterError, SizeError
from .geometry import (
    ANIMAL_PENALIZED,
    ANIMAL_RESTRICTED,
    ANIMAL_UNRESTRICTED,
    PATH_MODEL,
    Animal,
    Path,
    Query,
    animal_length,
    euclidean_mst,
)
from .point_process import PointConfiguration

PATH_EXACT_CAP = 16
ANIMAL_EXACT_CAP = 14
DEFAULT_STEINER_RATIO = 0.5  # safe in every dimension: SMT >= MST / 2
DEFAULT_EFFORT = 150

STATUS_EXACT = "exact"
STATUS_BRACKET = "bracket"
STATUS_LOWER = "lower-bound"
STATUS_INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class SolveResult:
    status: str
    value: Optional[float] = None
    bracket: Optional[tuple[float, float]] = None
    witness: Optional[object] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.bracket is not None and self.bracket[0] > self.bracket[1] + 1e-12:
            raise ParameterError("bracket must satisfy low <= high")

    @property
    def low(self) -> float:
        if self.status == STATUS_BRACKET:
            return self.bracket[0]
        if self.status == STATUS_INFEASIBLE:
            return -math.inf
        return self.value

    @property
    def high(self) -> float:
        if self.status == STATUS_BRACKET:
            return self.bracket[1]
        if self.status == STATUS_INFEASIBLE:
            return -math.inf
        if self.status == STATUS_LOWER:
            return math.inf
        return self.value

    def to_json(self) -> dict:
        out = {"status": self.status}
        if self.status == STATUS_BRACKET:
            out["low"], out["high"] = self.bracket
        elif self.value is not None:
            out["value"] = self.value
        if self.witness is not None:
            out["witness"] = _witness_json(self.witness)
        if self.meta:
            out["meta"] = self.meta
        return out


def _witness_json(witness) -> dict:
    if isinstance(witness, Animal):
        data = witness.to_json()
        data["kind"] = "animal"
        return data
    data = {
        "kind": "path",
        "vertices": [{"pos": list(map(float, p)), "atom": None} for p in witness.vertices],
        "edges": [[i, i + 1] for i in range(witness.vertices.shape[0] - 1)],
    }
    return data


# ---------------------------------------------------------------------------
# candidate filtering
# ---------------------------------------------------------------------------


def path_candidates(cfg: PointConfiguration, x, y, ell: float) -> np.ndarray:
    """Atoms reachable by a budget-ell path: ellipse filter for directed
    queries, disk filter for one-endpoint queries."""
    if cfg.n == 0:
        return np.zeros(0, dtype=np.int64)
    x = np.asarray(x, dtype=float)
    dx = np.linalg.norm(cfg.positions - x, axis=1)
    if y is None:
        mask = dx <= ell + 1e-12
    else:
        y = np.asarray(y, dtype=float)
        dy = np.linalg.norm(cfg.positions - y, axis=1)
        mask = dx + dy <= ell + 1e-12
    return np.nonzero(mask)[0].astype(np.int64)


def animal_candidates(cfg: PointConfiguration, x, y, ell: float) -> np.ndarray:
    """Atoms an anchored animal of budget ell can contain: within ell of each
    anchor (walking through the animal bounds both gaps by ell)."""
    if cfg.n == 0:
        return np.zeros(0, dtype=np.int64)
    x = np.asarray(x, dtype=float)
    mask = np.linalg.norm(cfg.positions - x, axis=1) <= ell + 1e-12
    if y is not None:
        y = np.asarray(y, dtype=float)
        mask &= np.linalg.norm(cfg.positions - y, axis=1) <= ell + 1e-12
    return np.nonzero(mask)[0].astype(np.int64)


def _anchor_array(x, y, dim: int):
    anchors = np.zeros((2, dim))
    anchors[0] = np.asarray(x, dtype=float)
    n_anchors = 1
    if y is not None:
        anchors[1] = np.asarray(y, dtype=float)
        n_anchors = 2
    return anchors, n_anchors


# ---------------------------------------------------------------------------
# exact path solver (bitmask DP)
# ---------------------------------------------------------------------------


def solve_path_exact(
    cfg: PointConfiguration, x, y=None, ell: float = 1.0, cap: int = PATH_EXACT_CAP
) -> SolveResult:
    """Exact maximal path mass from x (to y, when given) within the budget.

    Optimal paths visit atoms only (skipping any other vertex shortens the
    path at equal mass), so the state space is (visited subset, last atom)
    with minimal route length as the stored value.
    """
    x = np.asarray(x, dtype=float)
    if y is not None:
        y = np.asarray(y, dtype=float)
        if np.linalg.norm(x - y) > ell:
            return SolveResult(STATUS_INFEASIBLE, meta={"reason": "endpoint gap exceeds budget"})
    ids = path_candidates(cfg, x, y, ell)
    n = ids.size
    if n > cap:
        raise SizeError(n, cap)
    if n == 0:
        verts = [x] if y is None else [x, y]
        return SolveResult(STATUS_EXACT, value=0.0, witness=Path(np.asarray(verts)), meta={"candidates": 0})
    pts = cfg.positions[ids]
    masses = cfg.masses[ids]
    dist0 = np.linalg.norm(pts - x, axis=1)
    dmat = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    dist1 = np.linalg.norm(pts - y, axis=1) if y is not None else np.zeros(n)
    value, mask, last, parent = K.held_karp(dist0, dmat, dist1, masses, float(ell), y is not None)
    order = K.reconstruct_order(mask, last, parent) if last >= 0 else []
    verts = [x] + [pts[j] for j in order] + ([y] if y is not None else [])
    return SolveResult(
        STATUS_EXACT,
        value=float(value),
        witness=Path(np.asarray(verts)),
        meta={"candidates": int(n), "atom_ids": [int(ids[j]) for j in order]},
    )


# ---------------------------------------------------------------------------
# exact restricted-animal solver (subset branch and bound)
# ---------------------------------------------------------------------------


def solve_restricted_animal_exact(
    cfg: PointConfiguration, x, y=None, ell: float = 1.0, cap: int = ANIMAL_EXACT_CAP
) -> SolveResult:
    """Exact maximal mass over atom subsets S with MST(S) plus anchor gaps
    within the budget; the empty animal is always admissible (value 0)."""
    x = np.asarray(x, dtype=float)
    if y is not None:
        y = np.asarray(y, dtype=float)
    ids = animal_candidates(cfg, x, y, ell)
    n = ids.size
    if n > cap:
        raise SizeError(n, cap)
    if n == 0:
        return SolveResult(
            STATUS_EXACT, value=0.0, witness=Animal.empty(cfg.dim), meta={"candidates": 0}
        )
    anchors, n_anchors = _anchor_array(x, y, cfg.dim)
    pts = cfg.positions[ids]
    masses = cfg.masses[ids]
    value, mask = K.restricted_bnb(pts, masses, anchors, n_anchors, float(ell), 0.0)
    chosen = [int(ids[j]) for j in range(n) if (int(mask) >> j) & 1]
    if not chosen:
        witness = Animal.empty(cfg.dim)
    else:
        tree = euclidean_mst(cfg.positions[chosen])
        witness = Animal.from_atoms(cfg, chosen, tree.edges)
    return SolveResult(
        STATUS_EXACT,
        value=float(value),
        witness=witness,
        meta={"candidates": int(n), "atom_ids": chosen},
    )


# ---------------------------------------------------------------------------
# Fermat-junction tree improvement (explicit witnesses for the bracket low)
# ---------------------------------------------------------------------------


def fermat_point(a, b, c, tol: float = 1e-12, iters: int = 200) -> np.ndarray:
    """Point minimizing the summed distance to three points (Weiszfeld).

    Coincides with the widest-angle vertex when that angle is 120 degrees or
    more, in which case no junction can improve the connection.
    """
    pts = np.stack([np.asarray(a, float), np.asarray(b, float), np.asarray(c, float)])
    for i in range(3):
        u1 = pts[(i + 1) % 3] - pts[i]
        u2 = pts[(i + 2) % 3] - pts[i]
        n1, n2 = np.linalg.norm(u1), np.linalg.norm(u2)
        if n1 < 1e-15 or n2 < 1e-15:
            return pts[i].copy()
        if float(np.dot(u1, u2)) / (n1 * n2) <= -0.5:
            return pts[i].copy()
    xpt = pts.mean(axis=0)
    for _ in range(iters):
        dists = np.linalg.norm(pts - xpt, axis=1)
        if dists.min() < 1e-14:
            break
        w = 1.0 / dists
        nxt = (pts * w[:, None]).sum(axis=0) / w.sum()
        if np.linalg.norm(nxt - xpt) < tol:
            xpt = nxt
            break
        xpt = nxt
    return xpt


def _anchored_total(vertices: np.ndarray, edges, x, y) -> float:
    total = 0.0
    for a, b in edges:
        total += float(np.linalg.norm(vertices[a] - vertices[b]))
    total += float(np.linalg.norm(vertices - x, axis=1).min())
    if y is not None:
        total += float(np.linalg.norm(vertices - y, axis=1).min())
    return total


def fermat_rescue(
    cfg: PointConfiguration,
    atom_ids: list[int],
    x,
    y,
    ell: float,
    max_junctions: int = 16,
):
    """Try to fit the atom set within the budget by inserting free junctions.

    Starts from the MST and repeatedly replaces the two edges at a vertex by a
    three-edge star through their Fermat point while this shortens the tree.
    Returns (vertices, edges, atom_index, junction count) when the anchored
    total fits the budget, else None.
    """
    if not atom_ids:
        return None
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float) if y is not None else None
    vertices = cfg.positions[atom_ids].copy()
    atom_index = list(map(int, atom_ids))
    edges = [list(e) for e in euclidean_mst(vertices).edges] if len(atom_ids) > 1 else []
    junctions = 0
    while True:
        total = _anchored_total(vertices, edges, x, y)
        if total <= ell:
            return (
                vertices,
                tuple(tuple(e) for e in edges),
                np.asarray(atom_index, dtype=np.int64),
                junctions,
            )
        if junctions >= max_junctions:
            return None
        adj: dict[int, list[int]] = {}
        for a, b in edges:
            adj.setdefault(a, []).append(b)
            adj.setdefault(b, []).append(a)
        best = None
        for v, nbrs in adj.items():
            nbrs = sorted(nbrs)
            for i in range(len(nbrs)):
                for j in range(i + 1, len(nbrs)):
                    a, b = nbrs[i], nbrs[j]
                    f = fermat_point(vertices[v], vertices[a], vertices[b])
                    old = np.linalg.norm(vertices[v] - vertices[a]) + np.linalg.norm(
                        vertices[v] - vertices[b]
                    )
                    new = (
                        np.linalg.norm(vertices[v] - f)
                        + np.linalg.norm(vertices[a] - f)
                        + np.linalg.norm(vertices[b] - f)
                    )
                    gain = old - new
                    if gain > 1e-12 and (best is None or gain > best[0]):
                        best = (gain, v, a, b, f)
        if best is None:
            return None
        _, v, a, b, f = best
        fid = vertices.shape[0]
        vertices = np.vstack([vertices, f[None, :]])
        atom_index.append(-1)
        edges = [e for e in edges if set(e) not in ({v, a}, {v, b})]
        edges.extend([[v, fid], [a, fid], [b, fid]])
        junctions += 1


# ---------------------------------------------------------------------------
# brackets for unrestricted / penalized animals
# ---------------------------------------------------------------------------


def _anchored_witness(animal: Animal, x, y) -> Animal:
    """Attach the query endpoints as free vertices (membership form used by
    the unrestricted family)."""
    x = np.asarray(x, dtype=float)
    pts = [x] if y is None else [x, np.asarray(y, dtype=float)]
    if animal.is_empty():
        verts = np.asarray(pts)
        edges = [(0, 1)] if len(pts) == 2 else []
        return Animal(verts, tuple(edges), np.full(len(pts), -1, dtype=np.int64))
    vertices = animal.vertices
    edges = list(animal.edges)
    atom_index = list(animal.atom_index)
    for p in pts:
        dist = np.linalg.norm(vertices - p, axis=1)
        nearest = int(np.argmin(dist))
        if dist[nearest] <= 1e-12:
            continue
        vertices = np.vstack([vertices, p[None, :]])
        atom_index.append(-1)
        edges.append((nearest, vertices.shape[0] - 1))
    return Animal(vertices, tuple(edges), np.asarray(atom_index, dtype=np.int64))


def solve_animal_bracket(
    cfg: PointConfiguration,
    query: Query,
    cap: int = ANIMAL_EXACT_CAP,
    rho: float = DEFAULT_STEINER_RATIO,
    effort: int = DEFAULT_EFFORT,
    seed: int = 0,
) -> SolveResult:
    """Bracket [low, high] for the unrestricted or penalized animal value.

    low comes from explicit feasible trees (restricted optimum, plus
    Fermat-junction rescues of heavier atom sets, each junction charged q);
    high from replacing the minimal connection cost of an atom set S by
    rho * MST(S with the anchors), which never exceeds the true Steiner
    length, and ignoring the penalty.  Penalties at least the total candidate
    mass collapse the problem to the restricted exact value.  Beyond the
    enumeration cap the bracket degrades gracefully to [heuristic witness,
    total candidate mass].
    """
    if query.model not in (ANIMAL_UNRESTRICTED, ANIMAL_PENALIZED):
        raise ParameterError("bracket solver handles unrestricted/penalized models")
    q = query.effective_q()
    x, y, ell = query.x, query.y, query.budget
    unrestricted = query.model == ANIMAL_UNRESTRICTED
    if unrestricted and y is not None and np.linalg.norm(x - y) > ell:
        return SolveResult(STATUS_INFEASIBLE, meta={"reason": "endpoint gap exceeds budget"})

    if math.isinf(q):
        res = solve_restricted_animal_exact(cfg, x, y, ell, cap=cap)
        return res

    ids = animal_candidates(cfg, x, y, ell)
    n = ids.size
    total_mass = float(cfg.masses[ids].sum()) if n else 0.0

    restricted = solve_restricted_animal_exact(cfg, x, y, ell, cap=cap) if n <= cap else None

    if q > 0 and q >= total_mass and restricted is not None:
        # every free vertex costs at least the whole collectable mass
        witness = restricted.witness if not unrestricted else _anchored_witness(restricted.witness, x, y)
        return SolveResult(
            STATUS_EXACT,
            value=restricted.value,
            witness=witness,
            meta={**restricted.meta, "collapsed": "penalty dominates total mass"},
        )

    if n > cap:
        heur = solve_heuristic(cfg, query, effort=effort, seed=seed)
        return SolveResult(
            STATUS_BRACKET,
            bracket=(heur.value, total_mass),
            witness=heur.witness,
            meta={"candidates": int(n), "loose": True},
        )

    anchors, n_anchors = _anchor_array(x, y, cfg.dim)
    if n == 0:
        high_val, high_mask = 0.0, 0
    else:
        high_val, high_mask = K.restricted_bnb(
            cfg.positions[ids], cfg.masses[ids], anchors, n_anchors, float(ell), float(rho)
        )
    low_val = restricted.value
    witness = restricted.witness

    # try to realize heavier atom sets with explicit Fermat junctions
    tried = set()
    for mask in {int(high_mask)} - {0}:
        if mask in tried:
            continue
        tried.add(mask)
        subset = [int(ids[j]) for j in range(n) if (mask >> j) & 1]
        subset_mass = float(cfg.masses[subset].sum())
        if subset_mass <= low_val + 1e-15:
            continue
        rescue = fermat_rescue(cfg, subset, x, y, ell)
        if rescue is None:
            continue
        vertices, edges, atom_index, junctions = rescue
        score = subset_mass - q * junctions
        if score > low_val:
            low_val = score
            witness = Animal(vertices, edges, atom_index)

    high_val = max(float(high_val), low_val)
    if unrestricted:
        witness = _anchored_witness(witness, x, y)
    return SolveResult(
        STATUS_BRACKET,
        bracket=(float(low_val), float(high_val)),
        witness=witness,
        meta={"candidates": int(n), "rho": rho},
    )


# ---------------------------------------------------------------------------
# heuristic solver (scalable lower bounds)
# ---------------------------------------------------------------------------


def _path_state_value(order, masses):
    return float(masses[order].sum()) if len(order) else 0.0


def _path_length_of(x, y, pts, order):
    verts = [x] + [pts[j] for j in order] + ([y] if y is not None else [])
    arr = np.asarray(verts)
    return float(np.linalg.norm(np.diff(arr, axis=0), axis=1).sum()), arr


def _greedy_path_fill(x, y, pts, masses, ell, order):
    n = pts.shape[0]
    directed = y is not None
    used = np.zeros(n, dtype=bool)
    used[order] = True
    while True:
        verts = [x] + [pts[j] for j in order] + ([y] if directed else [])
        arr = np.asarray(verts)
        cur_len = float(np.linalg.norm(np.diff(arr, axis=0), axis=1).sum())
        j, t, _ = K.insertion_scan(arr, arr.shape[0], pts, used, masses, float(ell), cur_len, directed)
        if j < 0:
            return order
        order.insert(t, j)  # slot t inserts after path vertex t (vertex 0 is x)
        used[j] = True


def _heuristic_path(cfg, query, effort, seed):
    x = query.x
    y = query.y
    ell = query.budget
    if y is not None and np.linalg.norm(x - y) > ell:
        return SolveResult(STATUS_INFEASIBLE, meta={"reason": "endpoint gap exceeds budget"})
    trivial_verts = np.asarray([x] if y is None else [x, y])
    trivial = SolveResult(STATUS_LOWER, value=0.0, witness=Path(trivial_verts), meta={"effort": 0})
    if effort <= 0:
        return trivial
    ids = path_candidates(cfg, x, y, ell)
    if ids.size == 0:
        return trivial
    pts = cfg.positions[ids]
    masses = cfg.masses[ids]
    rng = np.random.default_rng(np.random.SeedSequence((int(seed), 0x9A7)))

    best_order = _greedy_path_fill(x, y, pts, masses, ell, [])
    best_len, best_arr = _path_length_of(x, y, pts, best_order)
    best_val = _path_state_value(best_order, masses)

    for _ in range(effort - 1):
        order = list(best_order)
        if order:
            k = int(rng.integers(1, min(3, len(order)) + 1))
            drop = set(rng.choice(len(order), size=k, replace=False).tolist())
            order = [a for i, a in enumerate(order) if i not in drop]
        # shorten before refilling
        verts = [x] + [pts[j] for j in order] + ([y] if y is not None else [])
        arr = np.asarray(verts)
        K.two_opt_pass(arr, arr.shape[0], y is not None)
        inner = arr[1 : arr.shape[0] - (1 if y is not None else 0)]
        if len(order):
            # recover the order of surviving atoms from the rearranged vertices
            lookup = {tuple(pts[j]): j for j in order}
            order = [lookup[tuple(p)] for p in inner]
        order = _greedy_path_fill(x, y, pts, masses, ell, order)
        val = _path_state_value(order, masses)
        ln, arr2 = _path_length_of(x, y, pts, order)
        if val > best_val or (val == best_val and ln < best_len - 1e-12):
            best_val, best_len, best_order, best_arr = val, ln, order, arr2
    return SolveResult(
        STATUS_LOWER,
        value=best_val,
        witness=Path(best_arr),
        meta={"effort": effort, "candidates": int(ids.size), "atom_ids": [int(ids[j]) for j in best_order]},
    )


def _heuristic_animal(cfg, query, effort, seed):
    x, y, ell = query.x, query.y, query.budget
    q = query.effective_q()
    unrestricted = query.model == ANIMAL_UNRESTRICTED
    if unrestricted and y is not None and np.linalg.norm(x - y) > ell:
        return SolveResult(STATUS_INFEASIBLE, meta={"reason": "endpoint gap exceeds budget"})
    empty = Animal.empty(cfg.dim)
    trivial_witness = _anchored_witness(empty, x, y) if unrestricted else empty
    trivial = SolveResult(STATUS_LOWER, value=0.0, witness=trivial_witness, meta={"effort": 0})
    if effort <= 0:
        return trivial
    ids = animal_candidates(cfg, x, y, ell)
    if ids.size == 0:
        return trivial
    pts = cfg.positions[ids]
    masses = cfg.masses[ids]
    anchors, n_anchors = _anchor_array(x, y, cfg.dim)
    rng = np.random.default_rng(np.random.SeedSequence((int(seed), 0xA11)))

    def grow(allowed):
        count, chosen, parents, _ = K.tree_grow(
            pts, masses, allowed, anchors, n_anchors, float(ell)
        )
        subset = [int(chosen[t]) for t in range(count)]
        if not subset:
            return 0.0, [], ()
        # MST reconnection: never longer than the greedy attachment tree
        tree = euclidean_mst(pts[subset])
        return float(masses[subset].sum()), subset, tree.edges

    allowed = np.ones(ids.size, dtype=bool)
    best_val, best_subset, best_edges = grow(allowed)
    for _ in range(effort - 1):
        if best_subset:
            allowed = np.ones(ids.size, dtype=bool)
            k = int(rng.integers(1, min(3, len(best_subset)) + 1))
            banned = rng.choice(best_subset, size=k, replace=False)
            allowed[banned] = False
        val, subset, edges = grow(allowed)
        if val > best_val:
            best_val, best_subset, best_edges = val, subset, edges
    if not best_subset:
        return trivial
    witness = Animal.from_atoms(cfg, [int(ids[j]) for j in best_subset], best_edges)
    score = best_val
    if unrestricted:
        witness = _anchored_witness(witness, x, y)
    return SolveResult(
        STATUS_LOWER,
        value=float(score),
        witness=witness,
        meta={
            "effort": effort,
            "candidates": int(ids.size),
            "atom_ids": [int(ids[j]) for j in best_subset],
        },
    )


def solve_heuristic(
    cfg: PointConfiguration, query: Query, effort: int = DEFAULT_EFFORT, seed: int = 0
) -> SolveResult:
    """Deterministic seeded local search producing a feasible witness.

    Paths: greedy best-ratio insertion with 2-opt shortening and random
    removal/reinsertion rounds.  Animals: greedy anchored-tree growth with
    MST reconnection and random bans.  The reported value is a lower bound
    and is nondecreasing in the effort (best-so-far retained).
    """
    if query.model == PATH_MODEL:
        return _heuristic_path(cfg, query, effort, seed)
    if query.model == ANIMAL_RESTRICTED:
        return _heuristic_animal(cfg, query, effort, seed)
    return _heuristic_animal(cfg, query, effort, seed)


# ---------------------------------------------------------------------------
# chain verification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChainReport:
    values: dict
    comparisons: tuple
    passed: bool

    def to_json(self) -> dict:
        return {"values": self.values, "comparisons": list(self.comparisons), "passed": self.passed}


def verify_chain(cfg: PointConfiguration, ell: float, q: float, tol: float = 1e-9) -> ChainReport:
    """Check the inequality chain path(ell) <= penalized(ell) <= animal(ell)
    <= path(2 ell) on one realization, using exact values where defined and
    brackets otherwise."""
    origin = np.zeros(cfg.dim)
    np_l = solve_path_exact(cfg, origin, None, ell)
    np_2l = solve_path_exact(cfg, origin, None, 2.0 * ell)
    if math.isinf(q):
        nq = solve_restricted_animal_exact(cfg, origin, None, ell)
    else:
        nq = solve_animal_bracket(
            cfg, Query(model=ANIMAL_PENALIZED, x=origin, y=None, budget=ell, q=q)
        )
    na = solve_animal_bracket(cfg, Query(model=ANIMAL_PENALIZED, x=origin, y=None, budget=ell, q=0.0))
    comparisons = (
        {"name": "path(l) <= penalized(l)", "lhs": np_l.value, "rhs": nq.high, "ok": np_l.value <= nq.high + tol},
        {"name": "penalized(l) <= animal(l)", "lhs": nq.low, "rhs": na.high, "ok": nq.low <= na.high + tol},
        {"name": "animal(l) <= path(2l)", "lhs": na.low, "rhs": np_2l.value, "ok": na.low <= np_2l.value + tol},
    )
    values = {
        "path_l": np_l.value,
        "path_2l": np_2l.value,
        "penalized": [nq.low, nq.high],
        "animal": [na.low, na.high],
        "q": q,
    }
    return ChainReport(values, comparisons, all(c["ok"] for c in comparisons))


# ---------------------------------------------------------------------------
# sprinkling: relocate free vertices onto a low-intensity process
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SprinkleResult:
    animal: Animal
    total_displacement: float
    max_degree_replaced: int


def sprinkle_replace(
    xi: Animal, cfg_eps: PointConfiguration, base_atom_count: int = 0
) -> SprinkleResult:
    """Replace every free vertex by its nearest sprinkle atom.

    Returns the rewired animal (atom tags offset by ``base_atom_count`` so
    they index into the superposed configuration) and the summed displacement
    R.  The length increase is at most (max degree of replaced vertices) * R,
    which is asserted.
    """
    if xi.is_empty() or not bool(xi.free_mask().any()):
        return SprinkleResult(xi, 0.0, 0)
    if cfg_eps.n == 0:
        raise InfeasibleError("sprinkle process has no atoms")
    vertices = xi.vertices.copy()
    atom_index = xi.atom_index.copy()
    degrees = xi.degrees()
    total_r = 0.0
    max_deg = 0
    for i in np.nonzero(xi.free_mask())[0]:
        dist = np.linalg.norm(cfg_eps.positions - vertices[i], axis=1)
        j = int(np.argmin(dist))
        total_r += float(dist[j])
        max_deg = max(max_deg, int(degrees[i]))
        vertices[i] = cfg_eps.positions[j]
        atom_index[i] = base_atom_count + j
    # merge vertices that landed on the same sprinkle atom
    canonical: dict[int, int] = {}
    remap = np.arange(xi.n)
    for i in range(xi.n):
        tag = int(atom_index[i])
        if tag in canonical:
            remap[i] = canonical[tag]
        else:
            canonical[tag] = i
    keep = sorted(set(remap.tolist()))
    index_of = {v: k for k, v in enumerate(keep)}
    new_edges = set()
    for a, b in xi.edges:
        ra, rb = index_of[remap[a]], index_of[remap[b]]
        if ra != rb:
            new_edges.add(tuple(sorted((ra, rb))))
    new_animal = Animal(vertices[keep], tuple(sorted(new_edges)), atom_index[keep])
    bound = animal_length(xi) + max_deg * total_r
    if animal_length(new_animal) > bound + 1e-9:
        raise AssertionError("sprinkle length bound violated")
    return SprinkleResult(new_animal, total_r, max_deg)
