"""Mechanical checks of the constructive lemmas.

Each check generates randomized instances from a seed, asserts the lemma's
deterministic conclusion (or its statistical surrogate), and returns a small
report; the CLI maps them one-to-one onto ``glab verify`` subcommands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .estimation import g_function
from .geometry import (
    ANIMAL_PENALIZED,
    Animal,
    Query,
    anchor_representatives,
    animal_length,
    is_feasible,
    penalized_score,
    prune_bad_vertices,
    rewire_high_degree,
)
from .point_process import (
    IntensityDescriptor,
    check_moment_condition,
    moment_integral_quadrature,
    sample_ppp,
    sprinkle_integral,
)
from .solvers import sprinkle_replace, verify_chain


@dataclass(frozen=True)
class CheckReport:
    name: str
    trials: int
    failures: tuple
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "trials": self.trials,
            "passed": self.passed,
            "failures": [str(f) for f in self.failures],
            "details": self.details,
        }


# ---------------------------------------------------------------------------
# stretch bound on random feasible directed paths
# ---------------------------------------------------------------------------


def random_feasible_paths(
    dim: int, count: int, seed: int, beta_lo: float | None = None, beta_hi: float = 0.99
):
    """Random paths from 0 to beta*ell*e1 of length at most ell.

    Interior waypoints are Gaussian perturbations of the straight segment,
    rescaled (convexity makes bisection valid) so the total length hits a
    random fraction of the budget.  Yields (beta, ell, vertices)."""
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0x57E)))
    lo = beta_lo if beta_lo is not None else 1.0 / math.sqrt(dim)
    out = []
    for _ in range(count):
        r = rng.random()
        if r < 0.1:
            beta = lo
        elif r < 0.2:
            beta = beta_hi
        else:
            beta = lo + rng.random() * (beta_hi - lo)
        ell = 0.5 + 19.5 * rng.random()
        k = int(rng.integers(0, 7))
        start = np.zeros(dim)
        end = np.zeros(dim)
        end[0] = beta * ell
        if k == 0:
            out.append((beta, ell, np.stack([start, end])))
            continue
        t = np.sort(rng.random(k))
        base = t[:, None] * end[None, :]
        disp = rng.normal(0.0, 0.3 * ell, size=(k, dim))
        target = (beta + rng.random() * (1.0 - beta)) * ell

        def length_at(s):
            pts = np.vstack([start, base + s * disp, end])
            return float(np.linalg.norm(np.diff(pts, axis=0), axis=1).sum())

        if length_at(1.0) <= target:
            s = 1.0
        else:
            a, b = 0.0, 1.0
            for _ in range(60):
                mid = 0.5 * (a + b)
                if length_at(mid) <= target:
                    a = mid
                else:
                    b = mid
            s = a
        pts = np.vstack([start, base + s * disp, end])
        out.append((beta, ell, pts))
    return out


def check_stretch_bound(dim: int, count: int, seed: int, tol: float = 1e-9) -> CheckReport:
    """The stretched length of any feasible directed path at eccentricity beta
    is at most ell * g(beta)."""
    from .point_process import stretch_matrix_diagonal

    failures = []
    max_excess = -math.inf
    for beta, ell, pts in random_feasible_paths(dim, count, seed):
        diag = stretch_matrix_diagonal(beta, dim)
        stretched = pts * diag
        length = float(np.linalg.norm(np.diff(stretched, axis=0), axis=1).sum())
        bound = ell * g_function(beta, dim)
        excess = length - bound
        max_excess = max(max_excess, excess)
        if excess > tol:
            failures.append((dim, beta, ell, excess))
    return CheckReport(
        "stretch", count, tuple(failures), {"dim": dim, "max_excess": max_excess}
    )


# ---------------------------------------------------------------------------
# random animals and trees for the graph lemmas
# ---------------------------------------------------------------------------


def _random_attachment_tree(rng, n: int):
    return [(int(rng.integers(0, i)), i) for i in range(1, n)]


def random_tree_animal(rng, dim: int, n_lo: int = 2, n_hi: int = 30, star_bias=0.2):
    """Random geometric tree; occasionally a hub-and-spokes star to force
    high degrees."""
    n = int(rng.integers(n_lo, n_hi + 1))
    if rng.random() < star_bias:
        center = rng.uniform(-1, 1, size=dim)
        leaves = center + rng.normal(0, 1.0, size=(n - 1, dim))
        vertices = np.vstack([center[None, :], leaves])
        edges = [(0, i) for i in range(1, n)]
    else:
        vertices = rng.uniform(-3, 3, size=(n, dim))
        edges = _random_attachment_tree(rng, n)
    return Animal(vertices, tuple(edges), np.full(n, -1, dtype=np.int64))


def check_rewire(trials: int, seed: int) -> CheckReport:
    """Rewiring keeps the vertex set, never lengthens, kills close direction
    pairs, and caps the degree at the sphere packing number (6 in the plane,
    12 in dimension 3)."""
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0x4E1)))
    failures = []
    for trial in range(trials):
        dim = 2 if trial % 2 == 0 else 3
        xi = random_tree_animal(rng, dim)
        before = animal_length(xi)
        out = rewire_high_degree(xi)
        if out.vertices.shape != xi.vertices.shape or not np.array_equal(
            out.vertices, xi.vertices
        ):
            failures.append((trial, "vertex set changed"))
            continue
        after = animal_length(out)
        if after > before + 1e-9:
            failures.append((trial, f"length grew {before} -> {after}"))
            continue
        adj = {}
        for a, b in out.edges:
            adj.setdefault(a, []).append(b)
            adj.setdefault(b, []).append(a)
        max_deg = max((len(v) for v in adj.values()), default=0)
        cap = 6 if dim == 2 else 12
        if max_deg > cap:
            failures.append((trial, f"degree {max_deg} exceeds {cap} in d={dim}"))
            continue
        ok = True
        for v, nbrs in adj.items():
            dirs = []
            for w in nbrs:
                diff = out.vertices[w] - out.vertices[v]
                dirs.append(diff / np.linalg.norm(diff))
            for i in range(len(dirs)):
                for j in range(i + 1, len(dirs)):
                    if np.linalg.norm(dirs[i] - dirs[j]) < 1.0 - 1e-9:
                        ok = False
        if not ok:
            failures.append((trial, "close direction pair survived"))
    return CheckReport("rewire", trials, tuple(failures))


def random_anchored_animal(rng, dim: int = 2, tree_only: bool = False):
    """Random feasible anchored animal mixing atom and free vertices.

    Returns (animal, cfg, query).  At least two atom vertices are always
    present so the pruning count bound is non-vacuous."""
    nu = IntensityDescriptor.dirac_kind(1.0, 1.0, dim)
    window = np.stack([-np.full(dim, 3.0), np.full(dim, 3.0)], axis=1)
    sub = 0
    while True:
        cfg = sample_ppp(nu, window, np.random.SeedSequence((int(rng.integers(2**62)), sub)))
        if cfg.n >= 2:
            break
        sub += 1
    n_atoms = int(rng.integers(2, min(cfg.n, 6) + 1))
    atom_ids = rng.choice(cfg.n, size=n_atoms, replace=False)
    n_free = int(rng.integers(0, 5))
    free_pts = rng.uniform(-3, 3, size=(n_free, dim))
    vertices = np.vstack([cfg.positions[atom_ids], free_pts])
    tags = np.concatenate([atom_ids, np.full(n_free, -1)]).astype(np.int64)
    order = rng.permutation(vertices.shape[0])
    vertices = vertices[order]
    tags = tags[order]
    n = vertices.shape[0]
    edges = set(map(tuple, map(sorted, _random_attachment_tree(rng, n))))
    if not tree_only and n >= 3 and rng.random() < 0.4:
        extra = int(rng.integers(1, 3))
        for _ in range(extra):
            a, b = rng.choice(n, size=2, replace=False)
            if a != b:
                edges.add(tuple(sorted((int(a), int(b)))))
    animal = Animal(vertices, tuple(sorted(edges)), tags)
    x = np.zeros(dim)
    y = rng.uniform(-2, 2, size=dim) if rng.random() < 0.7 else None
    q = float(rng.choice([0.0, 0.3, 2.0]))
    anchored = animal_length(animal) + float(np.linalg.norm(vertices - x, axis=1).min())
    if y is not None:
        anchored += float(np.linalg.norm(vertices - y, axis=1).min())
    budget = anchored * (1.0 + rng.random())
    query = Query(model=ANIMAL_PENALIZED, x=x, y=y, budget=budget, q=q)
    return animal, cfg, query


def check_prune(trials: int, seed: int) -> CheckReport:
    """Pruning keeps feasibility, never lowers the penalized score, leaves
    every surviving bad vertex with degree >= 3, and on trees obeys
    #bad <= #good - 2 <= atom-vertex count."""
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0xB4D)))
    failures = []
    for trial in range(trials):
        tree_only = trial % 2 == 0
        animal, cfg, query = random_anchored_animal(rng, tree_only=tree_only)
        anchors = (query.x,) if query.y is None else (query.x, query.y)
        before = penalized_score(animal, cfg, query.q)
        pruned = prune_bad_vertices(animal, cfg, query.q, anchors)
        after = penalized_score(pruned, cfg, query.q)
        if not is_feasible(pruned, query):
            failures.append((trial, "feasibility lost"))
            continue
        if after < before - 1e-9:
            failures.append((trial, f"score dropped {before} -> {after}"))
            continue
        reps = anchor_representatives(pruned, anchors)
        deg = pruned.degrees()
        bad = [
            v
            for v in range(pruned.n)
            if pruned.atom_index[v] < 0 and v not in reps
        ]
        if any(deg[v] < 3 for v in bad):
            failures.append((trial, "bad vertex of degree < 3 survived"))
            continue
        if tree_only and pruned.n >= 2:
            n_good = pruned.n - len(bad)
            n_atoms = int((pruned.atom_index >= 0).sum())
            if len(bad) > n_good - 2:
                failures.append((trial, f"#bad={len(bad)} > #good-2={n_good - 2}"))
                continue
            if len(bad) > n_atoms:
                failures.append((trial, f"#bad={len(bad)} > atoms={n_atoms}"))
    return CheckReport("prune", trials, tuple(failures))


# ---------------------------------------------------------------------------
# sprinkling
# ---------------------------------------------------------------------------


def check_sprinkle(trials: int, seed: int, eps: float = 1.0) -> CheckReport:
    """Closed form of the displacement integral against quadrature, the
    deterministic length bound of the vertex replacement, and the Markov
    frequency of small total displacement."""
    failures = []
    closed_grid = []
    for dim in (2, 3):
        for e in (0.25, 1.0, 4.0):
            for total in (0.5, 1.0, 2.0):
                nu = IntensityDescriptor.dirac_kind(1.0, total, dim)
                try:
                    closed_grid.append(sprinkle_integral(nu, e, verify=True))
                except AssertionError as exc:
                    failures.append(("quadrature", dim, e, total, str(exc)))
    nu2 = IntensityDescriptor.dirac_kind(1.0, 1.0, 2)
    if not (
        sprinkle_integral(nu2, 0.5) > sprinkle_integral(nu2, 1.0) > sprinkle_integral(nu2, 2.0)
    ):
        failures.append(("monotone", "I(eps) not decreasing"))

    rng = np.random.default_rng(np.random.SeedSequence((seed, 0x5B1)))
    dim = 2
    nu_eps = IntensityDescriptor.dirac_kind(1.0, eps, dim)
    window = np.stack([-np.full(dim, 6.0), np.full(dim, 6.0)], axis=1)
    displacements = []
    for trial in range(trials):
        xi = random_tree_animal(rng, dim, n_lo=2, n_hi=12, star_bias=0.1)
        sub = 0
        while True:
            cfg_eps = sample_ppp(
                nu_eps, window, np.random.SeedSequence((seed, trial, sub, 0xE))
            )
            if cfg_eps.n >= 1:
                break
            sub += 1
        before = animal_length(xi)
        try:
            res = sprinkle_replace(xi, cfg_eps)
        except AssertionError as exc:
            failures.append((trial, f"length bound violated: {exc}"))
            continue
        after = animal_length(res.animal)
        if after > before + res.max_degree_replaced * res.total_displacement + 1e-9:
            failures.append((trial, "recomputed length bound violated"))
            continue
        if res.animal.free_mask().any():
            failures.append((trial, "free vertex survived replacement"))
            continue
        displacements.append(res.total_displacement)
    displacements = np.asarray(displacements)
    markov_ok = True
    freq = 1.0
    if displacements.size:
        freq = float((displacements <= 2.0 * displacements.mean()).mean())
        sigma = math.sqrt(0.25 / displacements.size)
        markov_ok = freq >= 0.5 - 3.0 * sigma
    if not markov_ok:
        failures.append(("markov", freq))
    return CheckReport(
        "sprinkle",
        trials,
        tuple(failures),
        {"markov_freq": freq, "closed_form_points": len(closed_grid)},
    )


# ---------------------------------------------------------------------------
# chain inequality on random exactly solvable instances
# ---------------------------------------------------------------------------


def small_dirac_config(seed, ell: float = 0.8, max_atoms: int = 12, dim: int = 2):
    """Dirac-mark realization on the 2*ell window, rejection-sampled to stay
    within the exact caps."""
    nu = IntensityDescriptor.dirac_kind(1.0, 1.0, dim)
    window = np.stack([-np.full(dim, 2 * ell), np.full(dim, 2 * ell)], axis=1)
    sub = 0
    while True:
        cfg = sample_ppp(nu, window, np.random.SeedSequence((seed, sub, 0xC0)))
        if cfg.n <= max_atoms:
            return cfg
        sub += 1


def check_chain(trials: int, seed: int, qs=(0.0, 0.5, math.inf), ell: float = 0.8) -> CheckReport:
    """Path value at ell <= penalized <= animal <= path value at 2 ell, using
    exact values and sound brackets, per penalty in the grid."""
    failures = []
    for trial in range(trials):
        cfg = small_dirac_config((seed, trial))
        for q in qs:
            report = verify_chain(cfg, ell, q)
            if not report.passed:
                failures.append((trial, q, report.comparisons))
    return CheckReport("chain", trials, tuple(failures), {"qs": [str(q) for q in qs]})


# ---------------------------------------------------------------------------
# moment condition closed forms
# ---------------------------------------------------------------------------


def check_moment(tol: float = 1e-8) -> CheckReport:
    """Closed-form tail integrals against adaptive quadrature across the
    descriptor menu, including the divergent pareto edge."""
    cases = [
        IntensityDescriptor.dirac_kind(1.0, 1.0, 2),
        IntensityDescriptor.dirac_kind(2.5, 0.3, 3),
        IntensityDescriptor.exponential_kind(1.0, 2),
        IntensityDescriptor.exponential_kind(2.0, 3, weight=4.0),
        IntensityDescriptor.pareto_kind(1.0, 5.0, 2),
        IntensityDescriptor.pareto_kind(0.5, 4.5, 4),
        IntensityDescriptor.mixture_kind([0.5, 1.5, 3.0], [1.0, 0.5, 0.25], 2),
    ]
    failures = []
    for nu in cases:
        closed = check_moment_condition(nu)
        quad = moment_integral_quadrature(nu, tol=1e-10)
        if not closed.finite or abs(closed.value - quad) > tol:
            failures.append((nu.to_json(), closed.value, quad))
    divergent = check_moment_condition(IntensityDescriptor.pareto_kind(1.0, 2.0, 2))
    if divergent.finite:
        failures.append(("pareto shape == d should diverge", divergent))
    return CheckReport("moment", len(cases) + 1, tuple(failures), {"tol": tol})
