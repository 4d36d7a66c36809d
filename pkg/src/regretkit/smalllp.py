"""Exact linear maximization over small box + difference-constraint polytopes.

Every utility-parameter block in this package has the same shape: per-variable
intervals plus pairwise constraints x_a >= x_b.  Such systems are difference
constraint systems, so consistency and per-variable tightest bounds come from
shortest paths, and both bound corners of the tightened box are feasible.  The
simplex solver exploits that: it starts from the tight lower corner with all
slacks basic, so no phase-1 is ever needed.

A brute-force vertex enumeration path is kept alongside as the reference
implementation for small blocks.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import InconsistentConstraintError

FEAS_TOL = 1e-9
PIVOT_TOL = 1e-10

Edge = tuple[int, int]  # (a, b) meaning x_a >= x_b


@dataclass(frozen=True)
class TightBounds:
    lo: np.ndarray
    hi: np.ndarray
    dist: np.ndarray  # (n+1)x(n+1) shortest-path closure; node n is the zero source


def close_system(lo, hi, edges: tuple[Edge, ...]) -> TightBounds:
    """Tighten bounds via all-pairs shortest paths; raise if inconsistent.

    dist[u, v] is the tightest derived bound on x_v - x_u (source node n has
    value 0), so dist[a, b] <= 0 proves x_a >= x_b.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    n = len(lo)
    dist = np.full((n + 1, n + 1), np.inf)
    np.fill_diagonal(dist, 0.0)
    dist[n, :n] = hi
    dist[:n, n] = -lo
    for a, b in edges:
        dist[a, b] = min(dist[a, b], 0.0)
    for k in range(n + 1):
        np.minimum(dist, dist[:, k, None] + dist[None, k, :], out=dist)
    if np.any(np.diag(dist) < -FEAS_TOL):
        raise InconsistentConstraintError("constraint system is infeasible")
    tight_hi = dist[n, :n].copy()
    tight_lo = -dist[:n, n].copy()
    # guard against negative-width dust from float accumulation
    bad = tight_lo > tight_hi
    if np.any(tight_lo > tight_hi + FEAS_TOL):
        raise InconsistentConstraintError("constraint system is infeasible")
    tight_lo[bad] = tight_hi[bad]
    return TightBounds(lo=tight_lo, hi=tight_hi, dist=dist)


def maximize(
    objective,
    lo,
    hi,
    edges: tuple[Edge, ...] = (),
    bounds: TightBounds | None = None,
) -> tuple[float, np.ndarray]:
    """Maximize objective . x over {lo <= x <= hi, x_a >= x_b}.

    Returns (value, maximizing vertex).  Exact up to float rounding.
    """
    c = np.asarray(objective, dtype=float)
    if bounds is None:
        bounds = close_system(lo, hi, edges)
    tlo, thi = bounds.lo, bounds.hi
    if not edges:
        x = np.where(c > 0, thi, tlo)
        return float(c @ x), x
    return _simplex_bounded(c, tlo, thi, tuple(edges))


def _simplex_bounded(c, tlo, thi, edges: tuple[Edge, ...]) -> tuple[float, np.ndarray]:
    """Bounded-variable primal simplex with Bland's rule.

    Structural variables carry the tightened intervals; one slack per edge with
    s_e = x_a - x_b in [0, hi_a - lo_b].  The tight lower corner is feasible
    (tightening propagates lo_a >= lo_b along every edge), so the all-slack
    basis is immediately feasible.
    """
    n = len(c)
    m = len(edges)
    total = n + m
    A = np.zeros((m, total))
    for r, (a, b) in enumerate(edges):
        A[r, a] += 1.0
        A[r, b] -= 1.0
        A[r, n + r] = -1.0
    lo = np.concatenate([tlo, np.zeros(m)])
    hi = np.concatenate([thi, [max(0.0, thi[a] - tlo[b]) for a, b in edges]])
    cost = np.concatenate([c, np.zeros(m)])

    x = lo.copy()
    x[n:] = [tlo[a] - tlo[b] for a, b in edges]
    basis = list(range(n, total))
    at_upper = np.zeros(total, dtype=bool)  # nonbasic position; basic entries ignored
    in_basis = np.zeros(total, dtype=bool)
    in_basis[n:] = True
    T = -A.copy()  # B = -I  =>  B^-1 A = -A

    for _ in range(20000):
        cb = cost[basis]
        reduced = cost - cb @ T
        entering = -1
        for j in range(total):
            if in_basis[j]:
                continue
            if not at_upper[j] and reduced[j] > PIVOT_TOL:
                entering = j
                break
            if at_upper[j] and reduced[j] < -PIVOT_TOL:
                entering = j
                break
        if entering < 0:
            value = float(cost @ x)
            return value, x[:n].copy()

        sigma = -1.0 if at_upper[entering] else 1.0
        w = T[:, entering]
        delta = -sigma * w  # change of basic values per unit step
        t_best = hi[entering] - lo[entering]
        leave_row = -1
        for r in range(m):
            k = basis[r]
            if delta[r] > PIVOT_TOL:
                t = (hi[k] - x[k]) / delta[r]
            elif delta[r] < -PIVOT_TOL:
                t = (lo[k] - x[k]) / delta[r]
            else:
                continue
            if t < t_best - PIVOT_TOL or (
                t < t_best + PIVOT_TOL and (leave_row < 0 or k < basis[leave_row])
            ):
                t_best = t
                leave_row = r
        t_best = max(t_best, 0.0)

        x[entering] += sigma * t_best
        for r in range(m):
            x[basis[r]] += delta[r] * t_best
        if leave_row < 0:
            at_upper[entering] = not at_upper[entering]
            continue
        leaving = basis[leave_row]
        in_basis[leaving] = False
        at_upper[leaving] = delta[leave_row] > 0
        x[leaving] = hi[leaving] if at_upper[leaving] else lo[leaving]
        in_basis[entering] = True
        basis[leave_row] = entering
        pivot = T[leave_row, entering]
        T[leave_row] /= pivot
        for r in range(m):
            if r != leave_row and abs(T[r, entering]) > 1e-14:
                T[r] -= T[r, entering] * T[leave_row]
    raise RuntimeError("simplex iteration cap exceeded")


def enumerate_vertices(lo, hi, edges: tuple[Edge, ...] = (), tol: float = FEAS_TOL) -> np.ndarray:
    """Reference path: all vertices of the block polytope by basis enumeration.

    Exponential; intended for blocks with at most ~8 parameters where it serves
    as the oracle for the simplex path.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    n = len(lo)
    rows: list[np.ndarray] = []
    rhs: list[float] = []
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        rows.append(e.copy())
        rhs.append(lo[i])
        rows.append(e)
        rhs.append(hi[i])
    for a, b in edges:
        e = np.zeros(n)
        e[a] = 1.0
        e[b] = -1.0
        rows.append(e)
        rhs.append(0.0)
    rows_arr = np.array(rows)
    rhs_arr = np.array(rhs)

    def feasible(x) -> bool:
        if np.any(x < lo - tol) or np.any(x > hi + tol):
            return False
        return all(x[a] >= x[b] - tol for a, b in edges)

    vertices: list[np.ndarray] = []
    for combo in itertools.combinations(range(len(rows)), n):
        M = rows_arr[list(combo)]
        if abs(np.linalg.det(M)) < 1e-12:
            continue
        x = np.linalg.solve(M, rhs_arr[list(combo)])
        if feasible(x):
            vertices.append(x)
    if not vertices:
        return np.empty((0, n))
    arr = np.array(vertices)
    rounded = np.round(arr / tol) * tol
    _, keep = np.unique(rounded, axis=0, return_index=True)
    return arr[sorted(keep)]


def maximize_by_vertices(objective, lo, hi, edges: tuple[Edge, ...] = ()) -> tuple[float, np.ndarray]:
    verts = enumerate_vertices(lo, hi, edges)
    if len(verts) == 0:
        raise InconsistentConstraintError("no vertices: system infeasible")
    vals = verts @ np.asarray(objective, dtype=float)
    best = int(np.argmax(vals))
    return float(vals[best]), verts[best]
