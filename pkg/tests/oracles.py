"""Independent reference implementations used to cross-check the solvers.

Deliberately naive: full enumeration, scipy's MST for connections.  These
stay independent of the production code paths they validate.
"""

import itertools

import numpy as np
from scipy.sparse.csgraph import minimum_spanning_tree as scipy_mst
from scipy.spatial.distance import pdist, squareform


def path_value_bruteforce(cfg, x, y, ell):
    """Max collectable mass over every atom subset and visit order; None when
    the endpoint gap alone exceeds the budget."""
    x = np.asarray(x, float)
    y = None if y is None else np.asarray(y, float)
    if y is not None and np.linalg.norm(x - y) > ell:
        return None
    best = 0.0
    n = cfg.n
    for r in range(1, n + 1):
        for subset in itertools.combinations(range(n), r):
            msum = float(cfg.masses[list(subset)].sum())
            if msum <= best:
                continue
            for order in itertools.permutations(subset):
                pts = [x] + [cfg.positions[i] for i in order] + ([] if y is None else [y])
                length = sum(
                    float(np.linalg.norm(pts[i] - pts[i + 1])) for i in range(len(pts) - 1)
                )
                if length <= ell:
                    best = msum
                    break
    return best


def restricted_value_bruteforce(cfg, x, y, ell):
    """Max mass over every atom subset whose scipy-MST plus anchor gaps fits."""
    x = np.asarray(x, float)
    y = None if y is None else np.asarray(y, float)
    best = 0.0
    n = cfg.n
    for r in range(1, n + 1):
        for subset in itertools.combinations(range(n), r):
            pts = cfg.positions[list(subset)]
            mst_len = 0.0
            if len(subset) > 1:
                dm = squareform(pdist(pts))
                mst_len = float(scipy_mst(dm).sum())
            cost = mst_len + float(np.linalg.norm(pts - x, axis=1).min())
            if y is not None:
                cost += float(np.linalg.norm(pts - y, axis=1).min())
            if cost <= ell:
                best = max(best, float(cfg.masses[list(subset)].sum()))
    return best
