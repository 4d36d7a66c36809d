"""Simulated users, synthetic problems, and strategy-comparison experiments.

Experiments follow one protocol: sample prior bounds per utility parameter,
sample a hidden true utility inside those priors (so simulated answers can
never contradict earlier ones), then run each strategy from the identical
(prior, true) pair and record minimax regret after every query.

Anchor priors are wide and off the unit scale on purpose; reported regret is
divided by the width between the best feasible utility of the global best
outcome and the worst feasible utility of the global worst under the initial
boxes, which puts curves from different runs on one comparable scale.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .document import ProblemDocument
from .elicit import ElicitationSession, Query, Termination, TraceStep
from .errors import RegretkitError, RejectionBudgetError
from .model import GaiModel, GaiStructure
from .regret import normalization_width
from .schema import Attribute, AttributeSchema
from .search import FeasibilitySpec, first_feasible, maximize_tables
from .space import UtilitySpace


@dataclass(frozen=True)
class PriorSpec:
    """Ranges the per-parameter prior intervals are drawn from."""

    lvf_range: tuple[float, float] = (0.0, 1.0)
    anchor_top_range: tuple[float, float] = (1.0, 50.0)
    anchor_bottom_range: tuple[float, float] = (-50.0, -1.0)
    seed: int = 0

    def __post_init__(self):
        if not (0.0 <= self.lvf_range[0] <= self.lvf_range[1] <= 1.0):
            raise RegretkitError("lvf_range must be a non-empty subinterval of [0,1]")
        for r in (self.anchor_top_range, self.anchor_bottom_range):
            if r[0] > r[1]:
                raise RegretkitError("anchor ranges must be non-empty")


def sample_prior(spec: PriorSpec, structure: GaiStructure) -> UtilitySpace:
    """Per-parameter intervals: two ordered draws from the configured range.

    Draw order is fixed (local values by factor then code, then anchors by
    factor), so a seed pins the space exactly.
    """
    rng = np.random.default_rng(spec.seed)
    lvf_lo, lvf_hi = [], []
    for n in structure.factor_sizes:
        draws = np.sort(rng.uniform(*spec.lvf_range, size=(n, 2)), axis=1)
        lvf_lo.append(draws[:, 0].copy())
        lvf_hi.append(draws[:, 1].copy())
    m = structure.n_factors
    anchor_lo = np.zeros((m, 2))
    anchor_hi = np.zeros((m, 2))
    for j in range(m):
        top = np.sort(rng.uniform(*spec.anchor_top_range, size=2))
        bottom = np.sort(rng.uniform(*spec.anchor_bottom_range, size=2))
        anchor_lo[j] = (top[0], bottom[0])
        anchor_hi[j] = (top[1], bottom[1])
    return UtilitySpace.initial(structure, lvf_lo, lvf_hi, anchor_lo, anchor_hi)


def sample_true_utility(space: UtilitySpace, seed: int = 0, budget: int = 20000) -> GaiModel:
    """Uniform point inside the polytope, per independent block, by rejection.

    Draws come from the tightened per-parameter intervals (which leaves the
    distribution unchanged but keeps the acceptance rate workable when
    comparison constraints have accumulated)."""
    rng = np.random.default_rng(seed)
    structure = space.structure
    local_values = []
    for j in range(structure.n_factors):
        tb = space._closure(("factor", j))
        edges = space.lvf_edges[j]
        for _ in range(budget):
            v = rng.uniform(tb.lo, tb.hi)
            if all(v[a] >= v[b] for a, b in edges):
                local_values.append(v)
                break
        else:
            raise RejectionBudgetError(f"factor {j}: no feasible local point in {budget} draws")
    tb = space._closure(("anchors",))
    _, _, edges = space._anchor_flat()
    for _ in range(budget):
        a = rng.uniform(tb.lo, tb.hi)
        if all(a[p] >= a[q] for p, q in edges):
            anchors = a
            break
    else:
        raise RejectionBudgetError(f"no feasible anchor point in {budget} draws")
    return GaiModel.build(
        structure, local_values, anchors[0::2], anchors[1::2]
    )


def simulate_answer(true_model: GaiModel, query: Query) -> bool:
    """Answer a query from the hidden utility; >= throughout, so boundary
    thresholds still produce consistent constraints."""
    if query.kind == "LB":
        return bool(true_model.local_values[query.factor][query.index] >= query.threshold)
    if query.kind == "LC":
        v = true_model.local_values[query.factor]
        return bool(v[query.index_a] >= v[query.index_b])
    if query.kind == "AB":
        arr = true_model.anchor_top if query.anchor == "top" else true_model.anchor_bottom
        return bool(arr[query.factor] >= query.threshold)
    return bool(
        true_model.anchor_top[query.factor_top] >= true_model.anchor_bottom[query.factor_bottom]
    )


# -- synthetic problem generation ---------------------------------------------


@dataclass(frozen=True)
class GeneratorSpec:
    """Shape parameters for a synthetic problem (or a named preset)."""

    preset: Optional[str] = None
    name: Optional[str] = None
    n_attributes: int = 8
    domain_range: tuple[int, int] = (2, 4)
    window: int = 3
    overlap: int = 1
    n_nogoods: int = 0
    catalog_size: Optional[int] = None
    seed: int = 0
    embed_priors: bool = True
    prior: PriorSpec = field(default_factory=PriorSpec)


PRESETS = ("car-rental-shape", "apartment-shape", "trend-10x5")

# Chain-window shapes matching published parameter counts:
# car-rental-shape: 26 attributes, 13 factors, 352 local + 26 anchor = 378 params.
# apartment-shape: 8 attributes, 5 factors, 146 local + 10 anchor = 156 params.
_CAR_ODD_DOMAINS = [9, 9, 9, 9, 9, 9, 9, 5, 5, 4, 4, 4]


def _preset_layout(preset: str) -> tuple[list[int], list[tuple[int, ...]], int, Optional[int]]:
    """Returns (domain sizes by position, windows by position, nogoods, catalog)."""
    if preset == "car-rental-shape":
        sizes = []
        for p in range(26):
            if p == 25:
                sizes.append(6)
            elif p % 2 == 0:
                sizes.append(2)
            else:
                sizes.append(_CAR_ODD_DOMAINS[(p - 1) // 2])
        windows = [tuple(range(2 * j, 2 * j + 3)) for j in range(12)] + [(24, 25)]
        return sizes, windows, 10, None
    if preset == "apartment-shape":
        sizes = [2, 8, 2, 8, 2, 2, 3, 24]
        windows = [(0, 1, 2), (2, 3, 4), (4, 5), (5, 6), (6, 7)]
        return sizes, windows, 0, 186
    if preset == "trend-10x5":
        sizes = [2] * 10
        windows = [(0, 1, 2), (2, 3, 4), (4, 5, 6), (6, 7, 8), (8, 9)]
        return sizes, windows, 3, None
    raise RegretkitError(f"unknown preset {preset!r}; expected one of {PRESETS}")


def generate_problem(gspec: GeneratorSpec) -> ProblemDocument:
    """Deterministic synthetic problem; factors are overlapping windows over a
    randomly permuted attribute order.  Nogoods are redrawn while they would
    empty the feasible space (bounded retries)."""
    rng = np.random.default_rng(gspec.seed)
    if gspec.preset is not None:
        pos_sizes, windows, n_nogoods, catalog_size = _preset_layout(gspec.preset)
        n = len(pos_sizes)
        name = gspec.name or gspec.preset
    else:
        n = gspec.n_attributes
        lo, hi = gspec.domain_range
        pos_sizes = [int(rng.integers(lo, hi + 1)) for _ in range(n)]
        step = max(gspec.window - gspec.overlap, 1)
        windows = []
        start = 0
        while True:
            end = min(start + gspec.window, n)
            windows.append(tuple(range(start, end)))
            if end >= n:
                break
            start += step
        n_nogoods = gspec.n_nogoods
        catalog_size = gspec.catalog_size
        name = gspec.name or f"synthetic-{gspec.seed}"

    perm = rng.permutation(n)
    sizes = [0] * n
    for p, s in enumerate(pos_sizes):
        sizes[perm[p]] = int(s)
    attrs = tuple(
        Attribute(f"a{i:02d}", tuple(f"v{k}" for k in range(sizes[i]))) for i in range(n)
    )
    reference = tuple([0] * n)
    best = tuple(s - 1 for s in sizes)
    schema = AttributeSchema(attrs, reference, best, reference)
    factors = tuple(tuple(sorted(int(perm[p]) for p in w)) for w in windows)
    tops, bottoms = [], []
    from .schema import LocalCodec

    for f in factors:
        codec = LocalCodec(tuple(f), tuple(sizes[a] for a in f))
        tops.append(codec.encode(best))
        bottoms.append(codec.encode(reference))
    structure = GaiStructure(schema, factors, tuple(tops), tuple(bottoms))

    if catalog_size is not None:
        total = int(np.prod(sizes, dtype=np.int64))
        picks = rng.choice(total, size=min(catalog_size, total), replace=False)
        items = []
        for code in sorted(int(c) for c in picks):
            out = []
            for s in reversed(sizes):
                out.append(code % s)
                code //= s
            items.append(tuple(reversed(out)))
        feas = FeasibilitySpec.explicit_catalog(items)
    else:
        nogoods: list = []
        for _ in range(n_nogoods):
            for _attempt in range(50):
                k = int(rng.integers(1, min(3, n) + 1))
                chosen = sorted(int(a) for a in rng.choice(n, size=k, replace=False))
                g = tuple((a, int(rng.integers(0, sizes[a]))) for a in chosen)
                trial = FeasibilitySpec.constraint_space(nogoods + [g])
                try:
                    first_feasible(structure, trial)
                except Exception:
                    continue
                nogoods.append(g)
                break
            else:
                raise RegretkitError("could not draw a feasibility-preserving nogood")
        feas = FeasibilitySpec.constraint_space(nogoods)

    lvf_priors = None
    anchor_priors = None
    if gspec.embed_priors:
        prior_space = sample_prior(
            replace(gspec.prior, seed=int(rng.integers(0, 2**31 - 1))), structure
        )
        lvf_priors = tuple(
            (prior_space.lvf_lo[j].copy(), prior_space.lvf_hi[j].copy())
            for j in range(structure.n_factors)
        )
        anchor_priors = (prior_space.anchor_lo.copy(), prior_space.anchor_hi.copy())
    return ProblemDocument(
        name=name,
        structure=structure,
        feasibility=feas,
        lvf_priors=lvf_priors,
        anchor_priors=anchor_priors,
        metadata={"generator_seed": gspec.seed},
    )


# -- experiments ---------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentSpec:
    problem: GeneratorSpec
    strategies: tuple[str, ...] = ("AB+LB", "LB", "random")
    runs: int = 20
    max_queries: int = 100
    prior: PriorSpec = field(default_factory=PriorSpec)
    seed: int = 0
    threshold_normalized: float = 0.0
    check_true_regret: bool = True


@dataclass
class RunRecord:
    strategy: str
    run: int
    width: float
    mmr: list[float]            # raw, one entry per query index 0..max_queries
    true_regret: list[float]    # same indexing; empty if checking disabled


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    records: list[RunRecord]
    max_true_regret_violation: float

    def curve(self, strategy: str) -> np.ndarray:
        """Mean normalized MMR per query index for one strategy."""
        rows = [np.array(r.mmr) / r.width for r in self.records if r.strategy == strategy]
        return np.mean(rows, axis=0)

    def to_csv(self) -> str:
        lines = ["strategy,queryIndex,meanMMR,stddev,runs"]
        for strategy in self.spec.strategies:
            rows = np.array(
                [np.array(r.mmr) / r.width for r in self.records if r.strategy == strategy]
            )
            means = rows.mean(axis=0)
            stds = rows.std(axis=0)
            for q in range(rows.shape[1]):
                lines.append(
                    f"{strategy},{q},{float(means[q])!r},{float(stds[q])!r},{rows.shape[0]}"
                )
        return "\n".join(lines) + "\n"


def _derived_seed(*parts: int) -> int:
    return int(np.random.SeedSequence(tuple(parts)).generate_state(1)[0])


def _true_best_value(structure, feas, true_model) -> float:
    value, _ = maximize_tables(structure, feas, true_model.factor_tables())
    return value


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    """Every strategy runs from the identical (prior, true utility) pair per
    run; curves are padded with the final value after early termination."""
    doc = generate_problem(spec.problem)
    structure = doc.structure
    feas = doc.feasibility
    records: list[RunRecord] = []
    worst_violation = 0.0
    for r in range(spec.runs):
        prior = replace(spec.prior, seed=_derived_seed(spec.seed, r, 0))
        space0 = sample_prior(prior, structure)
        true_model = sample_true_utility(space0, _derived_seed(spec.seed, r, 1))
        width = normalization_width(space0)
        best_true = (
            _true_best_value(structure, feas, true_model) if spec.check_true_regret else 0.0
        )
        for s, strategy in enumerate(spec.strategies):
            session = ElicitationSession(
                structure,
                space0,
                feas,
                strategy,
                Termination(
                    threshold=spec.threshold_normalized * width,
                    max_queries=spec.max_queries,
                ),
                seed=_derived_seed(spec.seed, r, 2 + s),
            )
            session.run(lambda q: simulate_answer(true_model, q))
            mmr: list[float] = []
            true_regret: list[float] = []
            last: Optional[TraceStep] = None
            for q in range(spec.max_queries + 1):
                step = session.trace[q] if q < len(session.trace) else last
                if q < len(session.trace):
                    last = step
                mmr.append(step.mmr)
                if spec.check_true_regret:
                    tr = best_true - true_model.evaluate(step.x_star)
                    true_regret.append(tr)
                    worst_violation = max(worst_violation, tr - step.mmr)
            records.append(RunRecord(strategy, r, width, mmr, true_regret))
    return ExperimentResult(
        spec=spec, records=records, max_true_regret_violation=worst_violation
    )
