"""Pairwise, maximum, and minimax regret over the current utility polytope.

The decomposition does all the work: for outcomes x, x' the adversary's gain
splits per factor into an unscaled local regret (a small linear maximization
over that factor's polytope) scaled by the factor weight, and weights can be
optimized independently of the local maximizations because they are always
non-negative.  On constraint spaces the adversary and the master problem of
constraint generation are table-driven searches (see regretkit.search); on
explicit catalogs everything reduces to vectorized pairwise sweeps plus
candidate generation.

Local regret tables are cached on the space per factor row/column; a factor's
cache dies with the first assertion touching that factor.  Full tables are
materialized only for factors with at most FULL_TABLE_MAX configurations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import search, smalllp
from .errors import EmptyFeasibleSetError, IterationLimitError
from .model import GaiModel, GaiStructure, coefficient_table
from .schema import Outcome
from .search import FeasibilitySpec
from .space import UtilitySpace

FULL_TABLE_MAX = 64
CG_EPSILON = 1e-6
CG_MAX_ITERATIONS = 1000
_TIE_TOL = 1e-12


@dataclass(frozen=True)
class MaximizingParams:
    """One feasible utility-parameter point attaining a regret maximum."""

    anchor_top: np.ndarray
    anchor_bottom: np.ndarray
    local_values: tuple[np.ndarray, ...]

    @property
    def weights(self) -> np.ndarray:
        return self.anchor_top - self.anchor_bottom

    def utility(self, structure: GaiStructure) -> GaiModel:
        """The parameter point as an evaluatable model."""
        return GaiModel.build(structure, self.local_values, self.anchor_top, self.anchor_bottom)


@dataclass(frozen=True)
class PairwiseRegret:
    value: float
    params: MaximizingParams


@dataclass(frozen=True)
class MaxRegretResult:
    value: float
    witness: Outcome
    params: MaximizingParams


@dataclass(frozen=True)
class ScenarioCut:
    """One generated constraint: adversary outcome plus the anchor vertex."""

    witness: Outcome
    anchor_top: np.ndarray
    anchor_bottom: np.ndarray
    subproblem_value: float
    master_value: float


@dataclass(frozen=True)
class DbSearchStats:
    """Work accounting for catalog candidate generation.

    Every generation round costs at most one n-vector of pairwise regrets
    (a new adversary's column, or a candidate's verification row), so
    pairwise_evaluations <= n * (1 + rounds) holds structurally.
    """

    pairwise_evaluations: int
    adversary_count: int
    verifications: int
    rounds: int


@dataclass(frozen=True)
class MinimaxResult:
    x_star: Outcome
    witness: Outcome
    value: float
    params: MaximizingParams
    trace: tuple[ScenarioCut, ...] = ()
    iterations: int = 0
    db_stats: Optional[DbSearchStats] = None


# -- local regret ------------------------------------------------------------


def _codes(structure: GaiStructure, x: Sequence[int]) -> list[int]:
    return [codec.encode(x) for codec in structure.codecs]


def _box_row(C: np.ndarray, a: int, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    D = C - C[a]
    return np.maximum(D, 0.0) @ hi + np.minimum(D, 0.0) @ lo


def local_regret_row(space: UtilitySpace, j: int, a: int) -> np.ndarray:
    """r[b] = max over factor j's polytope of the gain of b over a."""
    key = ("rrow", "factor", j, a)
    row = space._cache.get(key)
    if row is not None:
        return row
    C = coefficient_table(space.structure).matrices[j].astype(float)
    tb = space._closure(("factor", j))
    edges = space.lvf_edges[j]
    if not edges:
        full = space._cache.get(("rtab", "factor", j))
        if full is None and C.shape[0] <= FULL_TABLE_MAX:
            D = C[None, :, :] - C[:, None, :]
            full = np.maximum(D, 0.0) @ tb.hi + np.minimum(D, 0.0) @ tb.lo
            space._cache[("rtab", "factor", j)] = full
        row = full[a].copy() if full is not None else _box_row(C, a, tb.lo, tb.hi)
    else:
        n = C.shape[0]
        row = np.zeros(n)
        for b in range(n):
            d = C[b] - C[a]
            if b != a and np.any(d):
                row[b], _ = smalllp.maximize(d, tb.lo, tb.hi, edges, bounds=tb)
    space._cache[key] = row
    return row


def local_regret_col(space: UtilitySpace, j: int, b: int) -> np.ndarray:
    """r[a] = max over factor j's polytope of the gain of b over a."""
    key = ("rcol", "factor", j, b)
    col = space._cache.get(key)
    if col is not None:
        return col
    C = coefficient_table(space.structure).matrices[j].astype(float)
    tb = space._closure(("factor", j))
    edges = space.lvf_edges[j]
    if not edges:
        full = space._cache.get(("rtab", "factor", j))
        if full is not None:
            col = full[:, b].copy()
        else:
            D = C[b] - C
            col = np.maximum(D, 0.0) @ tb.hi + np.minimum(D, 0.0) @ tb.lo
    else:
        n = C.shape[0]
        col = np.zeros(n)
        for a in range(n):
            d = C[b] - C[a]
            if a != b and np.any(d):
                col[a], _ = smalllp.maximize(d, tb.lo, tb.hi, edges, bounds=tb)
    space._cache[key] = col
    return col


def local_regret(space: UtilitySpace, j: int, a: int, b: int) -> float:
    """Unscaled local regret of factor configuration a against adversary b."""
    return float(local_regret_row(space, j, a)[b])


def _local_regret_point(space, j, a, b) -> tuple[float, np.ndarray]:
    """Local regret plus one maximizing local-value vector."""
    tb = space._closure(("factor", j))
    if a == b:
        return 0.0, tb.lo.copy()
    C = coefficient_table(space.structure).matrices[j].astype(float)
    d = C[b] - C[a]
    if not np.any(d):
        return 0.0, tb.lo.copy()
    edges = space.lvf_edges[j]
    if not edges:
        point = np.where(d > 0, tb.hi, tb.lo)
        return float(d @ point), point
    return smalllp.maximize(d, tb.lo, tb.hi, edges, bounds=tb)


# -- pairwise regret ---------------------------------------------------------


def _weights_for(space: UtilitySpace, r: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
    """Max of sum_j w_j r_j over the anchor polytope; returns anchors too."""
    if space.has_anchor_comparisons():
        m = space.structure.n_factors
        obj = np.zeros(2 * m)
        obj[0::2] = r
        obj[1::2] = -r
        value, point = space.maximize_linear(("anchors",), obj)
        return value, point[0::2].copy(), point[1::2].copy()
    box = space.anchor_box()
    t_lo, t_hi = box.lo[0::2], box.hi[0::2]
    b_lo, b_hi = box.lo[1::2], box.hi[1::2]
    w_lo = np.maximum(0.0, t_lo - b_hi)
    w_hi = t_hi - b_lo
    top = np.empty(len(r))
    bottom = np.empty(len(r))
    pos = r > 0
    top[pos] = t_hi[pos]
    bottom[pos] = b_lo[pos]
    # minimal weight: anchors meet when the intervals overlap
    meet = np.maximum(t_lo, b_lo)
    overlap = t_lo < b_hi
    top[~pos] = np.where(overlap, meet, t_lo)[~pos]
    bottom[~pos] = np.where(overlap, meet, b_hi)[~pos]
    value = float(np.sum(np.maximum(w_lo * r, w_hi * r)))
    return value, top, bottom


def pairwise_regret(space: UtilitySpace, x: Sequence[int], x_prime: Sequence[int]) -> PairwiseRegret:
    """Worst-case gain of x' over x across the whole polytope."""
    structure = space.structure
    a_codes = _codes(structure, x)
    b_codes = _codes(structure, x_prime)
    r = np.zeros(structure.n_factors)
    points = []
    for j in range(structure.n_factors):
        r[j], point = _local_regret_point(space, j, a_codes[j], b_codes[j])
        points.append(point)
    value, top, bottom = _weights_for(space, r)
    params = MaximizingParams(anchor_top=top, anchor_bottom=bottom, local_values=tuple(points))
    return PairwiseRegret(value=value, params=params)


# -- max regret --------------------------------------------------------------


def max_regret(space: UtilitySpace, x: Sequence[int], feas: FeasibilitySpec) -> MaxRegretResult:
    """Worst feasible adversary against x; exact."""
    if feas.catalog is not None:
        value, witness = _db_max_regret_value(space, x, feas.catalog)
    elif space.has_anchor_comparisons():
        value, witness = _adversary_with_anchor_lp(space, x, feas)
    else:
        structure = space.structure
        a_codes = _codes(structure, x)
        w_lo, w_hi = space.weight_intervals()
        tables = [
            np.maximum(w_lo[j] * local_regret_row(space, j, a_codes[j]),
                       w_hi[j] * local_regret_row(space, j, a_codes[j]))
            for j in range(structure.n_factors)
        ]
        value, witness = search.maximize_tables(structure, feas, tables)
    pr = pairwise_regret(space, x, witness)
    return MaxRegretResult(value=pr.value, witness=witness, params=pr.params)


def _adversary_with_anchor_lp(space, x, feas) -> tuple[float, Outcome]:
    """Adversary search with cross-factor anchor constraints.

    The weight-interval relaxation stays admissible (it drops constraints), so
    it prunes; surviving leaves are evaluated exactly with the anchor LP.
    Desk-scale only: iterates feasible outcomes lazily.
    """
    structure = space.structure
    a_codes = _codes(structure, x)
    rows = [local_regret_row(space, j, a_codes[j]) for j in range(structure.n_factors)]
    w_lo, w_hi = space.weight_intervals()
    bound_tables = [np.maximum(w_lo[j] * rows[j], w_hi[j] * rows[j])
                    for j in range(structure.n_factors)]
    best_val = -np.inf
    best_out: Optional[Outcome] = None
    memo: dict[tuple, float] = {}
    for candidate in search.iter_feasible(structure.schema, feas):
        codes = _codes(structure, candidate)
        bound = sum(bound_tables[j][codes[j]] for j in range(structure.n_factors))
        if bound <= best_val + _TIE_TOL and best_out is not None:
            continue
        r = tuple(float(rows[j][codes[j]]) for j in range(structure.n_factors))
        value = memo.get(r)
        if value is None:
            value, _, _ = _weights_for(space, np.array(r))
            memo[r] = value
        if value > best_val + _TIE_TOL or best_out is None:
            best_val, best_out = value, candidate
    if best_out is None:
        raise EmptyFeasibleSetError("hard constraints admit no configuration")
    return best_val, best_out


# -- minimax regret (constraint generation) ----------------------------------


def minimax_regret(
    space: UtilitySpace,
    feas: FeasibilitySpec,
    epsilon: float = CG_EPSILON,
    max_iterations: int = CG_MAX_ITERATIONS,
    seed_witnesses: Sequence[Outcome] = (),
) -> MinimaxResult:
    """Regret-minimizing feasible configuration by iterative cut generation.

    Alternates a master search (minimize the max over generated adversary
    scenarios) with the exact adversary subproblem; a scenario is added only
    while it beats the master value by more than epsilon.  The returned value
    is the true max regret of the final incumbent.

    seed_witnesses pre-populates the adversary pool (e.g. with the previous
    elicitation step's witnesses); any feasible outcome is a valid seed and
    only convergence speed depends on the choice.
    """
    if feas.catalog is not None:
        return db_minimax(space, feas.catalog)
    structure = space.structure
    # Without cross-factor anchor constraints, the pairwise regret against a
    # fixed witness separates per factor (weights re-optimized pointwise), so
    # one witness yields the strongest valid cut: its exact pairwise-regret
    # table.  With anchor comparisons, the weight vertex must stay fixed for
    # the cut to remain a valid lower bound on max regret.
    endpoint_cuts = not space.has_anchor_comparisons()
    w_lo, w_hi = space.weight_intervals()

    def witness_cut(witness: Outcome, weights: Optional[np.ndarray]) -> list[np.ndarray]:
        w_codes = _codes(structure, witness)
        cols = [local_regret_col(space, j, w_codes[j]) for j in range(structure.n_factors)]
        if endpoint_cuts:
            return [np.maximum(w_lo[j] * cols[j], w_hi[j] * cols[j])
                    for j in range(structure.n_factors)]
        return [weights[j] * cols[j] for j in range(structure.n_factors)]

    def scenario_value(x: Outcome, tables: list[list[np.ndarray]]) -> float:
        codes = _codes(structure, x)
        return max(
            sum(float(scen[j][codes[j]]) for j in range(structure.n_factors))
            for scen in tables
        )

    scenario_tables: list[list[np.ndarray]] = []
    if endpoint_cuts:
        for w in dict.fromkeys(tuple(w) for w in seed_witnesses):
            scenario_tables.append(witness_cut(w, None))
    trace: list[ScenarioCut] = []
    best: Optional[MinimaxResult] = None
    warm: Optional[tuple[float, Outcome]] = None
    for iteration in range(1, max_iterations + 1):
        master_value, incumbent = search.minimize_max_tables(
            structure, feas, scenario_tables, warm=warm, repair_ties=False
        )
        if not scenario_tables:
            master_value = 0.0
        sub = max_regret(space, incumbent, feas)
        trace.append(
            ScenarioCut(
                witness=sub.witness,
                anchor_top=sub.params.anchor_top.copy(),
                anchor_bottom=sub.params.anchor_bottom.copy(),
                subproblem_value=sub.value,
                master_value=master_value,
            )
        )
        candidate = MinimaxResult(
            x_star=incumbent,
            witness=sub.witness,
            value=sub.value,
            params=sub.params,
            trace=tuple(trace),
            iterations=iteration,
        )
        if best is None or sub.value < best.value:
            best = candidate
        if sub.value <= master_value + epsilon:
            return candidate
        scenario_tables.append(witness_cut(sub.witness, sub.params.weights))
        warm = (scenario_value(incumbent, scenario_tables), incumbent)
    raise IterationLimitError(
        f"constraint generation exceeded {max_iterations} iterations", best=best
    )


# -- explicit catalogs -------------------------------------------------------


class _PairwiseCache:
    """Memoized pairwise regret values over a fixed catalog.

    Values are computed in vectorized sweeps (a column fixes the adversary, a
    row fixes the choice); every (choice, adversary) pair is counted once.
    """

    def __init__(self, space: UtilitySpace, catalog: Sequence[Outcome]):
        self.space = space
        self.items = [tuple(int(v) for v in it) for it in catalog]
        structure = space.structure
        grid = np.array(self.items, dtype=np.int64)
        self.codes = [codec.encode_grid(grid) for codec in structure.codecs]
        self.w_lo, self.w_hi = space.weight_intervals()
        self.use_lp = space.has_anchor_comparisons()
        self._vals: dict[tuple[int, int], float] = {}
        self._lp_memo: dict[tuple, float] = {}

    @property
    def evaluations(self) -> int:
        return len(self._vals)

    def _value_from_r(self, r_mat: np.ndarray) -> np.ndarray:
        if not self.use_lp:
            return np.sum(np.maximum(self.w_lo * r_mat, self.w_hi * r_mat), axis=1)
        out = np.empty(len(r_mat))
        for i, r in enumerate(r_mat):
            key = tuple(r)
            v = self._lp_memo.get(key)
            if v is None:
                v, _, _ = _weights_for(self.space, r)
                self._lp_memo[key] = v
            out[i] = v
        return out

    def column(self, s: int) -> np.ndarray:
        """pairwise(i, s) for every choice i against adversary s."""
        missing = [i for i in range(len(self.items)) if (i, s) not in self._vals]
        if missing:
            structure = self.space.structure
            r_mat = np.empty((len(missing), structure.n_factors))
            for j in range(structure.n_factors):
                col = local_regret_col(self.space, j, int(self.codes[j][s]))
                r_mat[:, j] = col[self.codes[j][missing]]
            vals = self._value_from_r(r_mat)
            for i, v in zip(missing, vals):
                self._vals[(i, s)] = float(v)
        return np.array([self._vals[(i, s)] for i in range(len(self.items))])

    def row(self, i: int) -> np.ndarray:
        """pairwise(i, s) for every adversary s against choice i."""
        missing = [s for s in range(len(self.items)) if (i, s) not in self._vals]
        if missing:
            structure = self.space.structure
            r_mat = np.empty((len(missing), structure.n_factors))
            for j in range(structure.n_factors):
                row = local_regret_row(self.space, j, int(self.codes[j][i]))
                r_mat[:, j] = row[self.codes[j][missing]]
            vals = self._value_from_r(r_mat)
            for s, v in zip(missing, vals):
                self._vals[(i, s)] = float(v)
        return np.array([self._vals[(i, s)] for s in range(len(self.items))])


def _db_max_regret_value(space, item, catalog) -> tuple[float, Outcome]:
    cache = _PairwiseCache(space, catalog)
    target = tuple(int(v) for v in item)
    if target in cache.items:
        row = cache.row(cache.items.index(target))
    else:
        extended = _PairwiseCache(space, list(catalog) + [target])
        row = extended.row(len(extended.items) - 1)[:-1]
        cache = extended
    top = float(row.max())
    best = min(
        (s for s in range(len(row)) if row[s] >= top - _TIE_TOL),
        key=lambda s: cache.items[s],
    )
    return float(row[best]), cache.items[best]


def db_max_regret(space: UtilitySpace, item: Sequence[int], catalog: Sequence[Outcome]) -> MaxRegretResult:
    """Max regret of one item against an explicit catalog."""
    if not catalog:
        raise EmptyFeasibleSetError("catalog is empty")
    value, witness = _db_max_regret_value(space, item, catalog)
    pr = pairwise_regret(space, item, witness)
    return MaxRegretResult(value=pr.value, witness=witness, params=pr.params)


def db_minimax(space: UtilitySpace, catalog: Sequence[Outcome]) -> MinimaxResult:
    """Minimax-optimal catalog item by candidate generation.

    Candidates found against the current adversary set become adversaries
    themselves; when a candidate repeats, its true max regret is verified with
    one full row, which either certifies optimality or contributes the missed
    witness.  Matches the exhaustive pairwise computation exactly.
    """
    if not catalog:
        raise EmptyFeasibleSetError("catalog is empty")
    cache = _PairwiseCache(space, catalog)
    n = len(cache.items)
    adversaries = {0}
    colmax = cache.column(0)
    verifications = 0
    rounds = 0
    verified: dict[int, tuple[float, int]] = {}  # candidate -> (true MR, witness)

    def finish(cand: int, value: float, w: int) -> MinimaxResult:
        pr = pairwise_regret(space, cache.items[cand], cache.items[w])
        return MinimaxResult(
            x_star=cache.items[cand],
            witness=cache.items[w],
            value=pr.value,
            params=pr.params,
            iterations=rounds,
            db_stats=DbSearchStats(
                pairwise_evaluations=cache.evaluations,
                adversary_count=len(adversaries),
                verifications=verifications,
                rounds=rounds,
            ),
        )

    while True:
        rounds += 1
        cand = min(range(n), key=lambda i: (colmax[i], cache.items[i], i))
        if verified:
            # a previously verified candidate whose true max regret no other
            # item can beat is already optimal
            best_cand, (best_mr, best_w) = min(
                verified.items(), key=lambda kv: (kv[1][0], cache.items[kv[0]])
            )
            if best_mr <= colmax[cand] + _TIE_TOL:
                return finish(best_cand, best_mr, best_w)
        if cand not in adversaries:
            adversaries.add(cand)
            colmax = np.maximum(colmax, cache.column(cand))
            continue
        verifications += 1
        row = cache.row(cand)
        w = min(
            (s for s in range(n) if row[s] >= row.max() - _TIE_TOL),
            key=lambda s: cache.items[s],
        )
        if row[w] <= colmax[cand] + _TIE_TOL:
            return finish(cand, float(row[w]), w)
        verified[cand] = (float(row[w]), w)
        adversaries.add(w)
        colmax = np.maximum(colmax, cache.column(w))


# -- reporting helpers -------------------------------------------------------


def utility_interval(space: UtilitySpace, outcome: Sequence[int]) -> tuple[float, float]:
    """Feasible range of u(outcome) from per-factor interval arithmetic."""
    structure = space.structure
    codes = _codes(structure, outcome)
    w_lo, w_hi = space.weight_intervals()
    lo = hi = 0.0
    for j in range(structure.n_factors):
        C = coefficient_table(structure).matrices[j].astype(float)[codes[j]]
        if np.any(C):
            u_hi, _ = space.maximize_linear(("factor", j), C)
            neg, _ = space.maximize_linear(("factor", j), -C)
            u_lo = -neg
        else:
            u_lo = u_hi = 0.0
        corners = [w_lo[j] * u_lo, w_lo[j] * u_hi, w_hi[j] * u_lo, w_hi[j] * u_hi]
        lo += min(corners)
        hi += max(corners)
    return float(lo), float(hi)


def normalization_width(space: UtilitySpace) -> float:
    """Reporting scale: max feasible u(global best) - min feasible u(global worst)."""
    schema = space.structure.schema
    _, best_hi = utility_interval(space, schema.global_best)
    worst_lo, _ = utility_interval(space, schema.global_worst)
    width = best_hi - worst_lo
    return width if width > 0 else 1.0
