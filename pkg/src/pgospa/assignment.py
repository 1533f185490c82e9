"""Exact rectangular linear assignment.

``solve_assignment`` matches every index of the smaller side of an m x n
cost matrix one-to-one into the larger side at globally minimal total
cost.  The optimum is found with scipy's shortest-augmenting-path solver;
a complementary-slackness refinement then selects the lexicographically
smallest optimal pair list, so results are reproducible when several
matchings tie.  The refinement is exact for matrices up to
``LEX_REFINE_MAX`` on a side; beyond that the solver's (deterministic)
matching is returned directly, since exact ties are a measure-zero event
for real-valued costs at that scale.

``enumerate_assignment`` is an independent brute-force oracle over all
injections, limited to max(m, n) <= 8, applying the same tie-break rule.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import linear_sum_assignment

__all__ = ["Assignment", "solve_assignment", "enumerate_assignment", "LEX_REFINE_MAX"]

LEX_REFINE_MAX = 64
ENUMERATE_MAX = 8
_TIE_REL_TOL = 1e-12


@dataclass(frozen=True)
class Assignment:
    """Pair list sorted by row index, plus the summed cost of the pairs."""

    pairs: tuple
    total_cost: float


def _pairs_total(costs: np.ndarray, pairs) -> float:
    total = 0.0
    for i, j in pairs:
        total += float(costs[i, j])
    return total


def _check_matrix(costs) -> np.ndarray:
    C = np.asarray(costs, dtype=float)
    if C.ndim != 2:
        raise ValueError(f"cost matrix must be 2-D, got shape {C.shape}")
    if C.size and not np.all(np.isfinite(C)):
        raise ValueError("cost matrix entries must be finite")
    return C


def solve_assignment(costs) -> Assignment:
    """Globally optimal matching of all min(m, n) rows/cols.

    Ties between optimal matchings are broken toward the lexicographically
    smallest pair list (guaranteed for max(m, n) <= LEX_REFINE_MAX).
    """
    C = _check_matrix(costs)
    m, n = C.shape
    if min(m, n) == 0:
        return Assignment((), 0.0)
    rid, cid = linear_sum_assignment(C)
    pairs = sorted(zip(rid.tolist(), cid.tolist()))
    if max(m, n) <= LEX_REFINE_MAX:
        pairs = _lex_refine(C, pairs)
    return Assignment(tuple(pairs), _pairs_total(C, pairs))


def enumerate_assignment(costs) -> Assignment:
    """Brute-force optimal matching over all injections (max side <= 8)."""
    C = _check_matrix(costs)
    m, n = C.shape
    if max(m, n) > ENUMERATE_MAX:
        raise ValueError(f"enumeration limited to max(m, n) <= {ENUMERATE_MAX}")
    if min(m, n) == 0:
        return Assignment((), 0.0)
    tol = _TIE_REL_TOL * max(1.0, float(np.abs(C).max()) * min(m, n))

    if m <= n:
        P = _perm_array(n, m)
        totals = C[np.arange(m)[None, :], P].sum(axis=1)
        tmin = float(totals.min())
        # iteration order of permutations is the lexicographic order of the
        # pair lists, so the first near-minimal index is the tie-break winner
        idx = int(np.flatnonzero(totals <= tmin + tol)[0])
        pairs = tuple((i, int(P[idx, i])) for i in range(m))
        return Assignment(pairs, _pairs_total(C, pairs))

    P = _perm_array(n, n)
    blocks = []
    tmin = np.inf
    for rows_sel in itertools.combinations(range(m), n):
        rs = np.array(rows_sel)
        totals = C[rs[:, None], P.T].sum(axis=0)
        blocks.append((rows_sel, totals))
        tmin = min(tmin, float(totals.min()))
    best_pairs = None
    for rows_sel, totals in blocks:
        for idx in np.flatnonzero(totals <= tmin + tol):
            pairs = tuple(zip(rows_sel, (int(j) for j in P[idx])))
            if best_pairs is None or pairs < best_pairs:
                best_pairs = pairs
    return Assignment(best_pairs, _pairs_total(C, best_pairs))


@lru_cache(maxsize=None)
def _perm_array(n: int, k: int) -> np.ndarray:
    perms = list(itertools.permutations(range(n), k))
    return np.array(perms, dtype=np.intp).reshape(len(perms), k)


# ---------------------------------------------------------------------------
# Lexicographic tie-break refinement.
#
# From an optimal matching we build dual potentials (u, v) by Bellman
# relaxation of the complementary-slackness constraints.  The optimal
# matchings are then exactly the matchings that use only tight edges
# (zero reduced cost) and saturate every strictly-negative potential on
# the slack side.  A sequential fixing pass over the rows, with bipartite
# feasibility checks on the tight graph, selects the lexicographically
# smallest such matching.


def _duals_rows_complete(C: np.ndarray, sigma: np.ndarray):
    """Feasible complementary duals for an optimal row-complete matching."""
    m, n = C.shape
    base = C[np.arange(m), sigma]
    v = np.zeros(n)
    for _ in range(n + 2):
        cand = ((v[sigma] - base)[:, None] + C).min(axis=0)
        new_v = np.minimum(v, cand)
        if np.array_equal(new_v, v):
            break
        v = new_v
    u = base - v[sigma]
    return u, v


def _saturates_rows(adj: np.ndarray) -> bool:
    """True if a matching saturating every row of the boolean adjacency
    matrix exists (Kuhn's augmenting paths)."""
    a, b = adj.shape
    if a == 0:
        return True
    if a > b or not adj.any(axis=1).all():
        return False
    match_col = np.full(b, -1, dtype=int)

    def try_row(r: int, seen: np.ndarray) -> bool:
        for j in np.flatnonzero(adj[r] & ~seen):
            seen[j] = True
            if match_col[j] < 0 or try_row(match_col[j], seen):
                match_col[j] = r
                return True
        return False

    for r in range(a):
        if not try_row(r, np.zeros(b, dtype=bool)):
            return False
    return True


def _completable(tight, rows_left, cols_left, req_rows, req_cols, rows_complete):
    ri = np.flatnonzero(rows_left)
    ci = np.flatnonzero(cols_left)
    sub = tight[np.ix_(ri, ci)]
    if rows_complete:
        if not _saturates_rows(sub):
            return False
        req = req_cols[ci]
        return _saturates_rows(sub[:, req].T)
    if not _saturates_rows(sub.T):
        return False
    req = req_rows[ri]
    return _saturates_rows(sub[req, :])


def _lex_refine(C: np.ndarray, base_pairs: list) -> list:
    m, n = C.shape
    k = min(m, n)
    rows_complete = m <= n
    if rows_complete:
        sigma = np.array([j for _, j in base_pairs])
        u, v = _duals_rows_complete(C, sigma)
    else:
        by_col = sorted((j, i) for i, j in base_pairs)
        sigma_t = np.array([i for _, i in by_col])
        # duals on the transpose: first component runs over original columns
        v_cols, u_rows = _duals_rows_complete(C.T, sigma_t)
        u, v = u_rows, v_cols

    scale = max(1.0, float(np.abs(C).max()))
    tol = _TIE_REL_TOL * scale
    tight = (C - u[:, None] - v[None, :]) <= tol
    for i, j in base_pairs:
        tight[i, j] = True

    if rows_complete:
        if (tight.sum(axis=1) == 1).all():
            return list(base_pairs)
        req_rows = np.ones(m, dtype=bool)
        req_cols = v < -tol
    else:
        if (tight.sum(axis=0) == 1).all():
            return list(base_pairs)
        req_rows = u < -tol
        req_cols = np.ones(n, dtype=bool)

    rows_left = np.ones(m, dtype=bool)
    cols_left = np.ones(n, dtype=bool)
    chosen = []
    for r in range(m):
        rows_left[r] = False
        if len(chosen) == k:
            if req_rows[r] and not rows_complete:
                return list(base_pairs)
            continue
        pick = -1
        for j in np.flatnonzero(tight[r] & cols_left):
            cols_left[j] = False
            if _completable(tight, rows_left, cols_left, req_rows, req_cols, rows_complete):
                pick = int(j)
                break
            cols_left[j] = True
        if pick >= 0:
            chosen.append((r, pick))
        else:
            if rows_complete or req_rows[r]:
                return list(base_pairs)
            if not _completable(tight, rows_left, cols_left, req_rows, req_cols, rows_complete):
                return list(base_pairs)
    if len(chosen) != k:
        return list(base_pairs)
    # keep the refinement only if it is still optimal within tie tolerance
    if abs(_pairs_total(C, chosen) - _pairs_total(C, base_pairs)) > tol * max(1, k) * 4:
        return list(base_pairs)
    return chosen
