"""Paths, animals, and the constructive graph procedures.

Lengths and penalized masses, the depth-first cover path, degree rewiring,
bad-vertex pruning, and the Euclidean minimum spanning tree.  All geometry is
double precision; internal length comparisons use absolute tolerance 1e-12.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import InfeasibleError, ParameterError
from .point_process import PointConfiguration

LENGTH_TOL = 1e-12
FEAS_TOL = 1e-9

PATH_MODEL = "path"
ANIMAL_UNRESTRICTED = "animal-unrestricted"
ANIMAL_RESTRICTED = "animal-restricted"
ANIMAL_PENALIZED = "animal-penalized"
MODELS = (PATH_MODEL, ANIMAL_UNRESTRICTED, ANIMAL_RESTRICTED, ANIMAL_PENALIZED)


@dataclass(frozen=True)
class Path:
    """Ordered finite sequence of points; repetitions allowed."""

    vertices: np.ndarray  # (n, d)

    def __post_init__(self):
        vertices = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        if vertices.shape[0] < 1:
            raise ParameterError("a path needs at least one vertex")
        object.__setattr__(self, "vertices", vertices)

    def reverse(self) -> "Path":
        return Path(self.vertices[::-1].copy())


def path_length(gamma: Path) -> float:
    """Sum of consecutive Euclidean gaps; 0 for a single point."""
    v = gamma.vertices
    if v.shape[0] < 2:
        return 0.0
    return float(np.linalg.norm(np.diff(v, axis=0), axis=1).sum())


def path_mass(gamma: Path, cfg: PointConfiguration) -> float:
    """Mass of the path's vertex set: each atom visited counts once."""
    if cfg.n == 0 or gamma.vertices.shape[0] == 0:
        return 0.0
    hits = (cfg.positions[:, None, :] == gamma.vertices[None, :, :]).all(axis=2).any(axis=1)
    return float(cfg.masses[hits].sum())


@dataclass(frozen=True)
class Animal:
    """Finite connected geometric graph; vertices optionally tagged as atoms.

    ``atom_index[i]`` is the index of vertex i in its point configuration, or
    -1 for a free vertex.  The empty animal has no vertices and no edges.
    """

    vertices: np.ndarray  # (n, d)
    edges: tuple[tuple[int, int], ...]
    atom_index: np.ndarray  # (n,), -1 for free vertices

    def __post_init__(self):
        vertices = np.asarray(self.vertices, dtype=float)
        if vertices.size == 0:
            vertices = vertices.reshape(0, vertices.shape[1] if vertices.ndim == 2 else 0)
        atom_index = np.asarray(self.atom_index, dtype=np.int64).reshape(-1)
        edges = tuple(tuple(sorted((int(a), int(b)))) for a, b in self.edges)
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "atom_index", atom_index)
        n = vertices.shape[0]
        if atom_index.shape[0] != n:
            raise ParameterError("atom_index must match the vertex count")
        for a, b in edges:
            if a == b:
                raise ParameterError("self-loops are not allowed")
            if not (0 <= a < n and 0 <= b < n):
                raise ParameterError("edge references a missing vertex")
        if n > 0 and not _is_connected(n, edges):
            raise ParameterError("animal must be connected (or empty)")

    @classmethod
    def empty(cls, dim: int) -> "Animal":
        return cls(np.zeros((0, dim)), (), np.zeros(0, dtype=np.int64))

    @classmethod
    def from_atoms(
        cls, cfg: PointConfiguration, atom_ids: Sequence[int], edges: Iterable[tuple[int, int]]
    ) -> "Animal":
        atom_ids = list(atom_ids)
        return cls(
            cfg.positions[atom_ids].copy() if atom_ids else np.zeros((0, cfg.dim)),
            tuple(edges),
            np.asarray(atom_ids, dtype=np.int64),
        )

    @property
    def n(self) -> int:
        return int(self.vertices.shape[0])

    def is_empty(self) -> bool:
        return self.n == 0

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        return deg

    def free_mask(self) -> np.ndarray:
        return self.atom_index < 0

    def to_json(self) -> dict:
        return {
            "vertices": [
                {"pos": list(map(float, p)), "atom": (int(a) if a >= 0 else None)}
                for p, a in zip(self.vertices, self.atom_index)
            ],
            "edges": [list(e) for e in self.edges],
        }

    @classmethod
    def from_json(cls, data: dict, dim: int | None = None) -> "Animal":
        verts = data.get("vertices", [])
        if not verts:
            return cls.empty(dim if dim is not None else 2)
        positions = np.asarray([v["pos"] for v in verts], dtype=float)
        atom_index = np.asarray(
            [v["atom"] if v.get("atom") is not None else -1 for v in verts], dtype=np.int64
        )
        return cls(positions, tuple(tuple(e) for e in data.get("edges", ())), atom_index)


def _is_connected(n: int, edges) -> bool:
    if n <= 1:
        return True
    adj = [[] for _ in range(n)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    seen = np.zeros(n, dtype=bool)
    stack = [0]
    seen[0] = True
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if not seen[v]:
                seen[v] = True
                stack.append(v)
    return bool(seen.all())


def animal_length(xi: Animal) -> float:
    """Sum of edge lengths; 0 for a single vertex or the empty animal."""
    if not xi.edges:
        return 0.0
    total = 0.0
    for a, b in xi.edges:
        total += float(np.linalg.norm(xi.vertices[a] - xi.vertices[b]))
    return total


def vertex_distance(xi: Animal, x) -> float:
    """Distance from a point to the animal's vertex set; inf for empty."""
    if xi.is_empty():
        return math.inf
    x = np.asarray(x, dtype=float)
    return float(np.linalg.norm(xi.vertices - x, axis=1).min())


@dataclass(frozen=True)
class Query:
    """A value-function request: model, endpoints, budget, penalty."""

    model: str
    x: np.ndarray
    y: Optional[np.ndarray] = None
    budget: float = 1.0
    q: float = 0.0

    def __post_init__(self):
        if self.model not in MODELS:
            raise ParameterError(f"unknown model {self.model!r}")
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        if self.y is not None:
            object.__setattr__(self, "y", np.asarray(self.y, dtype=float))
        if self.budget <= 0:
            raise ParameterError("budget must be positive")
        if self.q < 0:
            raise ParameterError("penalty must be nonnegative")

    def effective_q(self) -> float:
        if self.model == ANIMAL_RESTRICTED:
            return math.inf
        if self.model == ANIMAL_UNRESTRICTED:
            return 0.0
        return self.q


def is_feasible(obj, query: Query, tol: float = FEAS_TOL) -> bool:
    """Membership in the admissible family selected by the query's model.

    Paths must run from x (to y when present) within the budget.  Unrestricted
    animals must contain the endpoints and respect the budget.  Restricted and
    penalized animals are charged the endpoint gaps instead, with the empty
    animal always feasible; restricted ones must use only atom vertices.
    """
    ell = query.budget
    if query.model == PATH_MODEL:
        if not isinstance(obj, Path):
            return False
        if np.linalg.norm(obj.vertices[0] - query.x) > tol:
            return False
        if query.y is not None and np.linalg.norm(obj.vertices[-1] - query.y) > tol:
            return False
        return path_length(obj) <= ell + tol
    if not isinstance(obj, Animal):
        return False
    if query.model == ANIMAL_UNRESTRICTED:
        if obj.is_empty():
            return False
        if vertex_distance(obj, query.x) > tol:
            return False
        if query.y is not None and vertex_distance(obj, query.y) > tol:
            return False
        return animal_length(obj) <= ell + tol
    # restricted / penalized share the anchored-length family
    if obj.is_empty():
        return True
    if query.model == ANIMAL_RESTRICTED and bool(obj.free_mask().any()):
        return False
    total = animal_length(obj) + vertex_distance(obj, query.x)
    if query.y is not None:
        total += vertex_distance(obj, query.y)
    return total <= ell + tol


def penalized_score(xi: Animal, cfg: PointConfiguration, q: float) -> float:
    """Mass of the atom vertices minus q per distinct free vertex.

    Returns -inf when q is infinite and a free vertex exists; 0 for the empty
    animal.  Duplicate vertices (same atom, or identical free position) count
    once, mirroring masses and cardinalities of vertex *sets*.
    """
    if xi.is_empty():
        return 0.0
    atom_ids = {int(a) for a in xi.atom_index if a >= 0}
    mass = float(cfg.masses[sorted(atom_ids)].sum()) if atom_ids else 0.0
    free_positions = {tuple(p) for p, a in zip(xi.vertices, xi.atom_index) if a < 0}
    n_free = len(free_positions)
    if n_free == 0:
        return mass
    if math.isinf(q):
        return -math.inf
    return mass - q * n_free


def _adjacency(xi: Animal) -> list[list[int]]:
    adj = [[] for _ in range(xi.n)]
    for a, b in xi.edges:
        adj[a].append(b)
        adj[b].append(a)
    for lst in adj:
        lst.sort()
    return adj


def dfs_cover_path(xi: Animal) -> Path:
    """Path covering every vertex by depth-first traversal from vertex 0.

    Only spanning-tree edges are walked, each at most twice, so the cover
    length is at most twice the animal length; the vertex set (hence the
    mass) is unchanged.
    """
    if xi.is_empty():
        raise InfeasibleError("empty animal has no cover path")
    if xi.n == 1:
        return Path(xi.vertices[:1].copy())
    adj = _adjacency(xi)
    visited = [False] * xi.n
    walk = [0]
    visited[0] = True

    stack = [(0, iter(adj[0]))]
    last_new = 0
    while stack:
        u, it = stack[-1]
        advanced = False
        for v in it:
            if not visited[v]:
                visited[v] = True
                walk.append(v)
                last_new = len(walk) - 1
                stack.append((v, iter(adj[v])))
                advanced = True
                break
        if not advanced:
            stack.pop()
            if stack:
                walk.append(stack[-1][0])
    # trailing backtracks after the last discovery only add length
    walk = walk[: last_new + 1]
    return Path(xi.vertices[walk].copy())


def rewire_high_degree(xi: Animal) -> Animal:
    """Rewire until no vertex carries two incident directions less than 1 apart.

    Each step removes the longer edge {x, x2} of an offending pair and adds
    {x1, x2}; the total length strictly decreases and connectivity and the
    vertex set are preserved.  In the plane the result has max degree <= 6,
    in dimension 3 at most 12.
    """
    if xi.n <= 1:
        return xi
    edges = {frozenset(e) for e in xi.edges}

    def neighbors(v):
        return sorted({next(iter(e - {v})) for e in edges if v in e})

    changed = True
    while changed:
        changed = False
        for v in range(xi.n):
            nbrs = neighbors(v)
            if len(nbrs) < 2:
                continue
            pv = xi.vertices[v]
            dirs = {}
            for w in nbrs:
                d = xi.vertices[w] - pv
                norm = np.linalg.norm(d)
                dirs[w] = d / norm if norm > 0 else d
            fired = False
            for i in range(len(nbrs)):
                for j in range(i + 1, len(nbrs)):
                    a, b = nbrs[i], nbrs[j]
                    if np.linalg.norm(dirs[a] - dirs[b]) < 1.0:
                        da = np.linalg.norm(xi.vertices[a] - pv)
                        db = np.linalg.norm(xi.vertices[b] - pv)
                        near, far = (a, b) if da <= db else (b, a)
                        edges.discard(frozenset((v, far)))
                        edges.add(frozenset((near, far)))
                        fired = True
                        break
                if fired:
                    break
            if fired:
                changed = True
                break
    return Animal(
        xi.vertices.copy(),
        tuple(tuple(sorted(e)) for e in edges),
        xi.atom_index.copy(),
    )


def anchor_representatives(xi: Animal, anchors: Sequence) -> set[int]:
    """Nearest vertex to each anchor (ties by vertex index), as in the pruning
    proof's protected endpoints."""
    reps: set[int] = set()
    if xi.is_empty():
        return reps
    for anchor in anchors:
        if anchor is None:
            continue
        dist = np.linalg.norm(xi.vertices - np.asarray(anchor, dtype=float), axis=1)
        reps.add(int(np.argmin(dist)))
    return reps


def prune_bad_vertices(xi: Animal, cfg: PointConfiguration, q: float, anchors) -> Animal:
    """Remove useless free vertices until every remaining one has degree >= 3.

    A vertex is bad when it is free and is not the protected nearest
    representative of an anchor.  Degree-1 bad vertices are deleted, degree-2
    bad vertices are contracted (their neighbors joined directly); by the
    triangle inequality the length never grows, so feasibility is preserved,
    and the penalized score never decreases.
    """
    if xi.is_empty():
        return xi
    protected = anchor_representatives(xi, anchors)
    good = set(np.nonzero(~xi.free_mask())[0].tolist()) | protected

    adj: dict[int, set[int]] = {v: set() for v in range(xi.n)}
    for a, b in xi.edges:
        adj[a].add(b)
        adj[b].add(a)
    alive = set(range(xi.n))

    while True:
        target = None
        for v in sorted(alive):
            if v in good:
                continue
            if len(adj[v]) <= 2:
                target = v
                break
        if target is None:
            break
        nbrs = sorted(adj[target])
        for w in nbrs:
            adj[w].discard(target)
        if len(nbrs) == 2:
            a, b = nbrs
            adj[a].add(b)
            adj[b].add(a)
        del adj[target]
        alive.discard(target)

    keep = sorted(alive)
    index_map = {v: i for i, v in enumerate(keep)}
    new_edges = set()
    for v in keep:
        for w in adj[v]:
            new_edges.add(tuple(sorted((index_map[v], index_map[w]))))
    return Animal(
        xi.vertices[keep].copy() if keep else np.zeros((0, xi.vertices.shape[1])),
        tuple(sorted(new_edges)),
        xi.atom_index[keep].copy() if keep else np.zeros(0, dtype=np.int64),
    )


@dataclass(frozen=True)
class SpanningTree:
    edges: tuple[tuple[int, int], ...]
    length: float


def euclidean_mst(points) -> SpanningTree:
    """Minimum spanning tree of a finite point set (Kruskal, deterministic
    tie-break by lexicographic edge comparison)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = pts.shape[0]
    if n == 0:
        raise ParameterError("point set must be nonempty")
    if n == 1:
        return SpanningTree((), 0.0)
    diffs = pts[:, None, :] - pts[None, :, :]
    dist = np.sqrt((diffs**2).sum(axis=2))
    order = sorted(
        ((dist[i, j], i, j) for i in range(n) for j in range(i + 1, n)),
        key=lambda t: (t[0], t[1], t[2]),
    )
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    edges = []
    total = 0.0
    for w, i, j in order:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            edges.append((i, j))
            total += w
            if len(edges) == n - 1:
                break
    return SpanningTree(tuple(edges), float(total))
