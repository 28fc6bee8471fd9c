"""Bottleneck and Wasserstein distances between persistence diagrams.

Diagrams of unequal size are compared with the usual diagonal augmentation:
each bar may be matched to its nearest diagonal point instead of a real
partner, and diagonal-to-diagonal matches are free.  For a bar with lifetime
l = death - birth, the nearest diagonal point is the orthogonal projection,
so the diagonal cost is l/2 under the max norm, l under the 1-norm, and
l/sqrt(2) under the 2-norm.

The bottleneck value is always one of the finitely many pairwise costs, so a
binary search over that set with a bipartite-matching feasibility test per
candidate returns the exact answer with no epsilon drift.  Wasserstein
distances are solved as optimal assignment on the augmented cost matrix.
``matching_oracle`` enumerates every augmented bijection outright and is the
ground truth for both on small diagrams.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .errors import InvalidParameter, OracleTooLarge
from .persistence import PersistenceDiagram

_Q_NORMS = (1, 2, math.inf)
_ORACLE_LIMIT = 8
_PERMS_CACHE: dict[int, np.ndarray] = {}


def _bar_array(diag: PersistenceDiagram) -> np.ndarray:
    dims = {bar[0] for bar in diag.bars}
    if len(dims) > 1:
        raise InvalidParameter(f"diagram mixes homology dimensions {sorted(dims)}")
    return np.array([[b, d] for _, b, d in diag.bars], dtype=np.float64).reshape(-1, 2)


def _pair_costs(P: np.ndarray, G: np.ndarray, q) -> np.ndarray:
    db = np.abs(P[:, None, 0] - G[None, :, 0])
    dd = np.abs(P[:, None, 1] - G[None, :, 1])
    if q == 1:
        return db + dd
    if q == 2:
        return np.hypot(db, dd)
    return np.maximum(db, dd)


def _diagonal_costs(B: np.ndarray, q) -> np.ndarray:
    life = B[:, 1] - B[:, 0]
    if q == 1:
        return life
    if q == 2:
        return life / math.sqrt(2.0)
    return life / 2.0


def _augmented_cost(P: np.ndarray, G: np.ndarray, q) -> np.ndarray:
    """(|P|+|G|) square cost matrix with diagonal slots appended on each side."""
    p, g = len(P), len(G)
    m = p + g
    C = np.zeros((m, m))
    if p and g:
        C[:p, :g] = _pair_costs(P, G, q)
    if p:
        C[:p, g:] = _diagonal_costs(P, q)[:, None]
    if g:
        C[p:, :g] = _diagonal_costs(G, q)[None, :]
    return C


def _check_q(q):
    if q not in _Q_NORMS:
        raise InvalidParameter(f"q must be 1, 2 or inf, got {q}")


def bottleneck(psi: PersistenceDiagram, gamma: PersistenceDiagram) -> float:
    """Smallest achievable maximum max-norm displacement over augmented bijections."""
    P, G = _bar_array(psi), _bar_array(gamma)
    m = len(P) + len(G)
    if m == 0:
        return 0.0
    C = _augmented_cost(P, G, math.inf)
    candidates = np.unique(C)

    def feasible(limit: float) -> bool:
        adjacency = csr_matrix(C <= limit)
        match = maximum_bipartite_matching(adjacency, perm_type="column")
        return int((match >= 0).sum()) == m

    lo, hi = 0, len(candidates) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(candidates[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(candidates[lo])


def wasserstein(psi: PersistenceDiagram, gamma: PersistenceDiagram, p=1, q=1) -> float:
    """Minimum over augmented bijections of (sum of q-norm costs^p)^(1/p)."""
    if not (isinstance(p, (int, np.integer)) and p >= 1):
        raise InvalidParameter(f"p must be an integer >= 1, got {p}")
    _check_q(q)
    P, G = _bar_array(psi), _bar_array(gamma)
    if len(P) + len(G) == 0:
        return 0.0
    C = _augmented_cost(P, G, q)
    rows, cols = linear_sum_assignment(C**p)
    return float(np.sum(C[rows, cols] ** p) ** (1.0 / p))


def _permutations(m: int) -> np.ndarray:
    perms = _PERMS_CACHE.get(m)
    if perms is None:
        perms = np.array(list(itertools.permutations(range(m))), dtype=np.intp)
        _PERMS_CACHE[m] = perms
    return perms


def matching_oracle(psi: PersistenceDiagram, gamma: PersistenceDiagram, p=1, q=1) -> float:
    """Exhaustive minimum over every augmented bijection; p may be inf (bottleneck)."""
    if p != math.inf and not (isinstance(p, (int, np.integer)) and p >= 1):
        raise InvalidParameter(f"p must be an integer >= 1 or inf, got {p}")
    _check_q(q)
    P, G = _bar_array(psi), _bar_array(gamma)
    m = len(P) + len(G)
    if m == 0:
        return 0.0
    if m > _ORACLE_LIMIT:
        raise OracleTooLarge(f"oracle limited to {_ORACLE_LIMIT} total bars, got {m}")
    C = _augmented_cost(P, G, q)
    gathered = C[np.arange(m)[None, :], _permutations(m)]
    if p == math.inf:
        return float(gathered.max(axis=1).min())
    return float((gathered**p).sum(axis=1).min() ** (1.0 / p))
