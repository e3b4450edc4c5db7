import itertools
import math

import numpy as np
import pytest

from glab.errors import InfeasibleError, ParameterError
from glab.geometry import (
    ANIMAL_PENALIZED,
    ANIMAL_RESTRICTED,
    ANIMAL_UNRESTRICTED,
    PATH_MODEL,
    Animal,
    Path,
    Query,
    anchor_representatives,
    animal_length,
    dfs_cover_path,
    euclidean_mst,
    is_feasible,
    path_length,
    path_mass,
    penalized_score,
    prune_bad_vertices,
    rewire_high_degree,
)
from glab.point_process import PointConfiguration


def _cfg(positions, masses):
    return PointConfiguration(
        dim=2, window=np.array([[-20, 20], [-20, 20]], float), positions=positions, masses=masses
    )


# ---------------------------------------------------------------------------
# lengths
# ---------------------------------------------------------------------------


def test_path_length_two_unit_steps():
    gamma = Path(np.array([[0, 0], [1, 0], [1, 1]], float))
    assert path_length(gamma) == pytest.approx(2.0)


def test_path_length_single_point_and_reversal():
    assert path_length(Path(np.array([[3.0, 4.0]]))) == 0.0
    rng = np.random.default_rng(1)
    gamma = Path(rng.normal(size=(7, 2)))
    assert path_length(gamma) == pytest.approx(path_length(gamma.reverse()))


def test_animal_length_star_and_empty():
    star = Animal(
        np.array([[0, 0], [1, 0], [-1, 0]], float),
        ((0, 1), (0, 2)),
        np.full(3, -1, np.int64),
    )
    assert animal_length(star) == pytest.approx(2.0)
    assert animal_length(Animal.empty(2)) == 0.0


def test_adding_edge_increases_length():
    tri = np.array([[0, 0], [1, 0], [0, 1]], float)
    a = Animal(tri, ((0, 1), (1, 2)), np.full(3, -1, np.int64))
    b = Animal(tri, ((0, 1), (1, 2), (0, 2)), np.full(3, -1, np.int64))
    assert animal_length(b) == pytest.approx(animal_length(a) + 1.0)


def test_animal_invariants():
    tri = np.array([[0, 0], [1, 0], [0, 1]], float)
    with pytest.raises(ParameterError):
        Animal(tri, ((0, 1),), np.full(3, -1, np.int64))  # disconnected
    with pytest.raises(ParameterError):
        Animal(tri, ((0, 0), (0, 1), (1, 2)), np.full(3, -1, np.int64))  # self-loop


# ---------------------------------------------------------------------------
# feasibility
# ---------------------------------------------------------------------------


def test_empty_animal_always_feasible_for_anchored_models():
    q = Query(model=ANIMAL_PENALIZED, x=np.zeros(2), y=np.array([5.0, 0]), budget=1.0, q=1.0)
    assert is_feasible(Animal.empty(2), q)
    q2 = Query(model=ANIMAL_RESTRICTED, x=np.zeros(2), budget=0.1)
    assert is_feasible(Animal.empty(2), q2)


def test_path_beyond_budget_is_infeasible():
    gamma = Path(np.array([[0, 0], [2, 0]], float))
    q = Query(model=PATH_MODEL, x=np.zeros(2), y=np.array([2.0, 0]), budget=1.0)
    assert not is_feasible(gamma, q)
    assert is_feasible(gamma, Query(model=PATH_MODEL, x=np.zeros(2), y=np.array([2.0, 0]), budget=2.0))


def test_single_atom_animal_feasibility_matches_gap_sum():
    z = np.array([0.4, 0.3])
    single = Animal(z[None, :], (), np.array([0], np.int64))
    x = np.zeros(2)
    y = np.array([1.0, 0.0])
    need = np.linalg.norm(z - x) + np.linalg.norm(z - y)
    ok = Query(model=ANIMAL_PENALIZED, x=x, y=y, budget=need + 1e-6, q=0.0)
    bad = Query(model=ANIMAL_PENALIZED, x=x, y=y, budget=need - 1e-3, q=0.0)
    assert is_feasible(single, ok)
    assert not is_feasible(single, bad)


def test_restricted_model_rejects_free_vertices():
    free = Animal(np.zeros((1, 2)), (), np.array([-1], np.int64))
    q = Query(model=ANIMAL_RESTRICTED, x=np.zeros(2), budget=5.0)
    assert not is_feasible(free, q)


# ---------------------------------------------------------------------------
# penalized score
# ---------------------------------------------------------------------------


def test_penalized_score_examples():
    cfg = _cfg([[0.0, 0.0], [1.0, 0.0]], [2.0, 3.0])
    both = Animal.from_atoms(cfg, [0, 1], [(0, 1)])
    assert penalized_score(both, cfg, 5.0) == pytest.approx(5.0)
    mixed = Animal(
        np.array([[0.0, 0.0], [0.5, 0.5]]), ((0, 1),), np.array([0, -1], np.int64)
    )
    assert penalized_score(mixed, cfg, 1.5) == pytest.approx(0.5)
    assert penalized_score(mixed, cfg, 0.0) == pytest.approx(2.0)
    assert penalized_score(mixed, cfg, math.inf) == -math.inf
    assert penalized_score(both, cfg, math.inf) == pytest.approx(5.0)
    assert penalized_score(Animal.empty(2), cfg, math.inf) == 0.0


# ---------------------------------------------------------------------------
# depth-first cover
# ---------------------------------------------------------------------------


def test_dfs_cover_star_and_edge():
    star = Animal(
        np.array([[0, 0], [1, 0], [-1, 0]], float), ((0, 1), (0, 2)), np.full(3, -1, np.int64)
    )
    cover = dfs_cover_path(star)
    assert path_length(cover) <= 2 * animal_length(star) + 1e-12
    assert {tuple(v) for v in cover.vertices} == {(0, 0), (1, 0), (-1, 0)}
    edge = Animal(np.array([[0, 0], [1, 1]], float), ((0, 1),), np.full(2, -1, np.int64))
    cover2 = dfs_cover_path(edge)
    assert cover2.vertices.shape == (2, 2)
    with pytest.raises(InfeasibleError):
        dfs_cover_path(Animal.empty(2))


def test_dfs_cover_random_trees_bound_and_mass():
    rng = np.random.default_rng(8)
    for _ in range(60):
        n = int(rng.integers(2, 13))
        pts = rng.uniform(-3, 3, size=(n, 2))
        edges = [(int(rng.integers(0, i)), i) for i in range(1, n)]
        tags = np.where(rng.random(n) < 0.5, np.arange(n), -1).astype(np.int64)
        xi = Animal(pts, tuple(edges), tags)
        cover = dfs_cover_path(xi)
        assert path_length(cover) <= 2 * animal_length(xi) + 1e-12
        assert {tuple(v) for v in cover.vertices} == {tuple(v) for v in pts}
        cfg = PointConfiguration(
            dim=2,
            window=np.array([[90, 110], [90, 110]], float),
            positions=pts + 100.0,
            masses=np.ones(n),
        )
        shifted = Path(cover.vertices + 100.0)
        assert path_mass(shifted, cfg) == pytest.approx(n)


# ---------------------------------------------------------------------------
# rewiring
# ---------------------------------------------------------------------------


def test_rewire_seven_spoke_fan_fires():
    angles = [2 * math.pi * k / 7 for k in range(7)]
    pts = np.vstack([[0.0, 0.0], [[math.cos(a), math.sin(a)] for a in angles]])
    edges = tuple((0, i) for i in range(1, 8))
    xi = Animal(pts, edges, np.full(8, -1, np.int64))
    gap = 2 * math.sin(math.pi / 7)  # adjacent unit directions, 51.43 degrees
    assert gap == pytest.approx(0.8678, abs=1e-4)
    out = rewire_high_degree(xi)
    assert animal_length(out) < animal_length(xi)
    new_edges = set(out.edges) - set(xi.edges)
    assert any(
        np.linalg.norm(out.vertices[a] - out.vertices[b]) == pytest.approx(gap, abs=1e-9)
        for a, b in new_edges
    )
    deg = out.degrees()
    assert deg.max() <= 6


def test_rewire_leaves_gentle_path_alone():
    pts = np.array([[0, 0], [1, 0], [2, 0.2], [3, 0.1]], float)
    xi = Animal(pts, ((0, 1), (1, 2), (2, 3)), np.full(4, -1, np.int64))
    out = rewire_high_degree(xi)
    assert set(out.edges) == set(xi.edges)


def test_rewire_preserves_vertices_and_monotone_length():
    rng = np.random.default_rng(12)
    for _ in range(40):
        n = int(rng.integers(2, 20))
        pts = rng.uniform(-2, 2, size=(n, 2))
        edges = [(int(rng.integers(0, i)), i) for i in range(1, n)]
        xi = Animal(pts, tuple(edges), np.full(n, -1, np.int64))
        out = rewire_high_degree(xi)
        assert np.array_equal(out.vertices, xi.vertices)
        assert animal_length(out) <= animal_length(xi) + 1e-12


# ---------------------------------------------------------------------------
# pruning
# ---------------------------------------------------------------------------


def test_prune_contracts_collinear_free_middle():
    cfg = _cfg([[0.0, 0.0], [1.0, 0.0]], [1.0, 1.0])
    xi = Animal(
        np.array([[0.0, 0.0], [0.5, 0.0], [1.0, 0.0]]),
        ((0, 1), (1, 2)),
        np.array([0, -1, 1], np.int64),
    )
    q = 0.7
    out = prune_bad_vertices(xi, cfg, q, (np.zeros(2), np.array([1.0, 0.0])))
    assert out.n == 2
    assert animal_length(out) == pytest.approx(1.0)
    assert penalized_score(out, cfg, q) == pytest.approx(penalized_score(xi, cfg, q) + q)


def test_prune_deletes_free_leaf():
    cfg = _cfg([[0.0, 0.0], [1.0, 0.0]], [1.0, 1.0])
    xi = Animal(
        np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]]),
        ((0, 1), (1, 2)),
        np.array([0, 1, -1], np.int64),
    )
    out = prune_bad_vertices(xi, cfg, 0.3, (np.zeros(2),))
    assert out.n == 2
    assert animal_length(out) < animal_length(xi)


def test_prune_protects_anchor_representative():
    cfg = _cfg([[5.0, 0.0]], [1.0])
    # the free vertex nearest to the anchor is protected even at degree 1
    xi = Animal(
        np.array([[0.1, 0.0], [5.0, 0.0]]), ((0, 1),), np.array([-1, 0], np.int64)
    )
    out = prune_bad_vertices(xi, cfg, 1.0, (np.zeros(2),))
    assert out.n == 2
    reps = anchor_representatives(out, (np.zeros(2),))
    assert any(out.atom_index[v] < 0 for v in reps)


def test_prune_tree_count_bound():
    rng = np.random.default_rng(77)
    from glab.verification import random_anchored_animal

    for _ in range(40):
        animal, cfg, query = random_anchored_animal(rng, tree_only=True)
        anchors = (query.x,) if query.y is None else (query.x, query.y)
        out = prune_bad_vertices(animal, cfg, query.q, anchors)
        reps = anchor_representatives(out, anchors)
        bad = [v for v in range(out.n) if out.atom_index[v] < 0 and v not in reps]
        deg = out.degrees()
        assert all(deg[v] >= 3 for v in bad)
        if out.n >= 2:
            assert len(bad) <= (out.n - len(bad)) - 2
            assert len(bad) <= int((out.atom_index >= 0).sum())


# ---------------------------------------------------------------------------
# minimum spanning tree
# ---------------------------------------------------------------------------


def test_mst_collinear_and_singleton():
    tree = euclidean_mst(np.array([[0, 0], [1, 0], [2, 0]], float))
    assert tree.length == pytest.approx(2.0)
    assert euclidean_mst(np.array([[5.0, 5.0]])).length == 0.0
    with pytest.raises(ParameterError):
        euclidean_mst(np.zeros((0, 2)))


def _mst_bruteforce(points):
    """All labeled trees via Pruefer sequences; minimal total length."""
    n = len(points)
    if n == 1:
        return 0.0
    if n == 2:
        return float(np.linalg.norm(points[0] - points[1]))
    best = math.inf
    for seq in itertools.product(range(n), repeat=n - 2):
        degree = [1] * n
        for v in seq:
            degree[v] += 1
        seq_list = list(seq)
        total = 0.0
        avail = sorted(i for i in range(n) if degree[i] == 1)
        deg = degree[:]
        import heapq

        heap = avail[:]
        heapq.heapify(heap)
        for v in seq_list:
            leaf = heapq.heappop(heap)
            total += float(np.linalg.norm(points[leaf] - points[v]))
            deg[v] -= 1
            if deg[v] == 1:
                heapq.heappush(heap, v)
        a, b = heapq.heappop(heap), heapq.heappop(heap)
        total += float(np.linalg.norm(points[a] - points[b]))
        best = min(best, total)
    return best


def test_mst_matches_bruteforce_on_small_sets():
    rng = np.random.default_rng(4)
    for n, repeats in ((3, 4), (4, 4), (5, 4), (6, 4), (7, 2), (8, 1)):
        for _ in range(repeats):
            pts = rng.uniform(0, 1, size=(n, 2))
            assert euclidean_mst(pts).length == pytest.approx(_mst_bruteforce(pts), abs=1e-9)
