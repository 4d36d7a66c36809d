"""Query generation, scoring, and the interactive elicitation loop.

Scoring follows the current-solution idea: only parameters whose coefficients
differ between the incumbent recommendation and the adversary's witness can
move the current regret, and each candidate query is scored by the regret
reduction it would force on the bounding-box approximation of its block.
Scores of bound, comparison, and anchor queries share one scale, so mixed
strategies can just take the argmax.

Four query types exist; anchor comparisons are answerable but never proposed
by the built-in strategies, mirroring how the strategy set is defined.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import RegretkitError
from .model import GaiStructure, coefficient_table
from .regret import MinimaxResult, minimax_regret
from .schema import Outcome
from .search import FeasibilitySpec
from .space import BoundConstraint, ComparisonConstraint, Constraint, ParamRef, UtilitySpace

STRATEGIES = ("LB", "LC", "LC(LB)", "LC+LB", "AB+LB", "AB+LC+LB", "random")


@dataclass(frozen=True)
class LocalBoundQuery:
    """Standard-gamble bound on one local value: is v >= threshold?"""

    factor: int
    index: int
    threshold: float

    kind = "LB"

    def constraint(self, answer: bool) -> Constraint:
        p = ParamRef("local", self.factor, self.index)
        return BoundConstraint(p, lo=self.threshold) if answer else BoundConstraint(p, hi=self.threshold)


@dataclass(frozen=True)
class LocalComparisonQuery:
    """Is local configuration index_a at least as good as index_b?"""

    factor: int
    index_a: int
    index_b: int

    kind = "LC"

    def constraint(self, answer: bool) -> Constraint:
        a = ParamRef("local", self.factor, self.index_a)
        b = ParamRef("local", self.factor, self.index_b)
        return ComparisonConstraint(a, b) if answer else ComparisonConstraint(b, a)


@dataclass(frozen=True)
class AnchorBoundQuery:
    """Standard-gamble bound on a factor's top or bottom anchor utility."""

    factor: int
    anchor: str  # "top" | "bottom"
    threshold: float

    kind = "AB"

    def constraint(self, answer: bool) -> Constraint:
        p = ParamRef("anchor_top" if self.anchor == "top" else "anchor_bottom", self.factor)
        return BoundConstraint(p, lo=self.threshold) if answer else BoundConstraint(p, hi=self.threshold)


@dataclass(frozen=True)
class AnchorComparisonQuery:
    """Is factor_top's best-anchor outcome preferred to factor_bottom's worst?"""

    factor_top: int
    factor_bottom: int

    kind = "AC"

    def constraint(self, answer: bool) -> Constraint:
        a = ParamRef("anchor_top", self.factor_top)
        b = ParamRef("anchor_bottom", self.factor_bottom)
        return ComparisonConstraint(a, b) if answer else ComparisonConstraint(b, a)


Query = Union[LocalBoundQuery, LocalComparisonQuery, AnchorBoundQuery, AnchorComparisonQuery]


def query_to_json(q: Query) -> dict:
    d = {"kind": q.kind}
    if q.kind == "LB":
        d.update(factor=q.factor, index=q.index, threshold=q.threshold)
    elif q.kind == "LC":
        d.update(factor=q.factor, index_a=q.index_a, index_b=q.index_b)
    elif q.kind == "AB":
        d.update(factor=q.factor, anchor=q.anchor, threshold=q.threshold)
    else:
        d.update(factor_top=q.factor_top, factor_bottom=q.factor_bottom)
    return d


def query_from_json(d: dict) -> Query:
    kind = d["kind"]
    if kind == "LB":
        return LocalBoundQuery(int(d["factor"]), int(d["index"]), float(d["threshold"]))
    if kind == "LC":
        return LocalComparisonQuery(int(d["factor"]), int(d["index_a"]), int(d["index_b"]))
    if kind == "AB":
        return AnchorBoundQuery(int(d["factor"]), d["anchor"], float(d["threshold"]))
    if kind == "AC":
        return AnchorComparisonQuery(int(d["factor_top"]), int(d["factor_bottom"]))
    raise RegretkitError(f"unknown query kind {kind!r}")


# -- rendering ---------------------------------------------------------------


def _levels_text(structure: GaiStructure, factor: int, code: int) -> str:
    codec = structure.codecs[factor]
    schema = structure.schema
    parts = [
        f"{schema.attributes[a].name}={schema.attributes[a].levels[lvl]}"
        for a, lvl in zip(codec.attrs, codec.decode(code))
    ]
    return ", ".join(parts)


def _conditioning_text(structure: GaiStructure, factor: int) -> str:
    cond = sorted(structure.conditioning_sets[factor])
    if not cond:
        return "the remaining attributes"
    names = ", ".join(structure.schema.attributes[a].name for a in cond)
    return f"the attributes {{{names}}}"


def _anchor_outcome_text(structure: GaiStructure, factor: int, top: bool) -> str:
    code = structure.local_top[factor] if top else structure.local_bottom[factor]
    return _levels_text(structure, factor, code)


def render_query(q: Query, structure: GaiStructure) -> dict:
    """Natural-language question plus the outcome cards it mentions."""
    schema = structure.schema
    if q.kind == "LB":
        top = _anchor_outcome_text(structure, q.factor, True)
        bottom = _anchor_outcome_text(structure, q.factor, False)
        subject = _levels_text(structure, q.factor, q.index)
        text = (
            f"Assume that {_conditioning_text(structure, q.factor)} are fixed at reference "
            f"levels. Would you prefer the partial outcome ({subject}) to a lottery "
            f"<{q.threshold:.4f}: {top}; {1 - q.threshold:.4f}: {bottom}>, assuming the "
            f"remaining attributes are fixed at the same levels?"
        )
        cards = {
            "subject": subject,
            "lottery": {"p": q.threshold, "top": top, "bottom": bottom},
        }
    elif q.kind == "LC":
        a = _levels_text(structure, q.factor, q.index_a)
        b = _levels_text(structure, q.factor, q.index_b)
        text = (
            f"Assume that {_conditioning_text(structure, q.factor)} are fixed at reference "
            f"levels. Would you prefer the partial outcome ({a}) to the partial outcome "
            f"({b}), all else equal?"
        )
        cards = {"left": a, "right": b}
    elif q.kind == "AB":
        anchor = _anchor_outcome_text(structure, q.factor, q.anchor == "top")
        best = ", ".join(
            f"{attr.name}={attr.levels[v]}" for attr, v in zip(schema.attributes, schema.global_best)
        )
        worst = ", ".join(
            f"{attr.name}={attr.levels[v]}" for attr, v in zip(schema.attributes, schema.global_worst)
        )
        text = (
            f"Consider a full outcome where factor {q.factor} is set to ({anchor}) and all "
            f"other attributes are fixed at reference levels. Do you prefer it to a lottery "
            f"<{q.threshold:.4f}: best outcome ({best}); otherwise: worst outcome ({worst})>?"
        )
        cards = {
            "subject": anchor,
            "lottery": {"p": q.threshold, "top": best, "bottom": worst},
        }
    else:
        a = _anchor_outcome_text(structure, q.factor_top, True)
        b = _anchor_outcome_text(structure, q.factor_bottom, False)
        text = (
            f"Do you prefer the global outcome where factor {q.factor_top} is at its best "
            f"({a}) to the one where factor {q.factor_bottom} is at its worst ({b}), other "
            f"attributes at reference levels in both?"
        )
        cards = {"left": a, "right": b}
    return {"kind": q.kind, "text": text, "cards": cards}


# -- scoring -----------------------------------------------------------------


@dataclass(frozen=True)
class QueryScore:
    query: Query
    score: float
    sort_key: tuple = field(default=(), compare=False)


def solution_coefficients(structure: GaiStructure, current: MinimaxResult) -> list[np.ndarray]:
    """Per factor, the witness-minus-incumbent coefficient difference vector."""
    ct = coefficient_table(structure)
    out = []
    for j, codec in enumerate(structure.codecs):
        a = codec.encode(current.x_star)
        b = codec.encode(current.witness)
        out.append((ct.matrices[j][b] - ct.matrices[j][a]).astype(float))
    return out


def score_local_bound(
    space: UtilitySpace, current: MinimaxResult, j: int, i: int,
    coeffs: Optional[Sequence[np.ndarray]] = None,
) -> QueryScore:
    """Scale times |coefficient| times half the bounding-box gap."""
    c = (coeffs or solution_coefficients(space.structure, current))[j][i]
    box = space.factor_box(j)
    gap = float(box.gap[i])
    weight = float(current.params.weights[j])
    score = weight * abs(c) * gap / 2.0
    threshold = float((box.lo[i] + box.hi[i]) / 2.0)
    return QueryScore(
        query=LocalBoundQuery(j, i, threshold),
        score=max(score, 0.0),
        sort_key=(j, i, -1, 0),
    )


def comparison_eligible(
    space: UtilitySpace, j: int, i: int, k: int, coeffs_j: np.ndarray
) -> bool:
    """Both coefficients nonzero, overlapping boxes, relation not yet known."""
    if coeffs_j[i] == 0 or coeffs_j[k] == 0:
        return False
    box = space.factor_box(j)
    if box.hi[i] < box.lo[k] or box.hi[k] < box.lo[i]:
        return False
    return space.known_relation(ParamRef("local", j, i), ParamRef("local", j, k)) is None


def score_local_comparison(
    space: UtilitySpace, current: MinimaxResult, j: int, i: int, k: int,
    coeffs: Optional[Sequence[np.ndarray]] = None,
) -> Optional[QueryScore]:
    """Diagonal-bisection estimate of the regret reduction; None if ineligible.

    Either answer pushes the maximizing point onto the diagonal of the
    projected bounding rectangle, so the reduction is measured against the
    better of the two diagonal-rectangle intersections, clamped at zero.
    """
    cj = (coeffs or solution_coefficients(space.structure, current))[j]
    if not comparison_eligible(space, j, i, k, cj):
        return None
    box = space.factor_box(j)
    t1 = max(float(box.lo[i]), float(box.lo[k]))
    t2 = min(float(box.hi[i]), float(box.hi[k]))
    vi = float(current.params.local_values[j][i])
    vk = float(current.params.local_values[j][k])
    ci, ck = float(cj[i]), float(cj[k])
    reduction = ci * vi + ck * vk - max(ci * t1 + ck * t1, ci * t2 + ck * t2)
    weight = float(current.params.weights[j])
    return QueryScore(
        query=LocalComparisonQuery(j, i, k),
        score=max(weight * reduction, 0.0),
        sort_key=(j, i, k, 1),
    )


def score_anchor_bound(
    space: UtilitySpace, current: MinimaxResult, j: int, anchor: str,
    coeffs: Optional[Sequence[np.ndarray]] = None,
) -> QueryScore:
    """|current local sum| times half the anchor gap; the exact counterpart of
    the bound-query score with the two roles exchanged."""
    cj = (coeffs or solution_coefficients(space.structure, current))[j]
    local_sum = float(cj @ current.params.local_values[j])
    box = space.anchor_box()
    idx = 2 * j + (0 if anchor == "top" else 1)
    gap = float(box.hi[idx] - box.lo[idx])
    threshold = float((box.lo[idx] + box.hi[idx]) / 2.0)
    return QueryScore(
        query=AnchorBoundQuery(j, anchor, threshold),
        score=max(abs(local_sum) * gap / 2.0, 0.0),
        sort_key=(j, 0 if anchor == "top" else 1, -1, 2),
    )


# -- candidate enumeration and selection --------------------------------------


def _candidates(
    space: UtilitySpace, current: MinimaxResult, kinds: tuple[str, ...],
    cost_weights: Optional[dict[str, float]] = None,
) -> list[QueryScore]:
    structure = space.structure
    coeffs = solution_coefficients(structure, current)
    weights = cost_weights or {}
    out: list[QueryScore] = []
    for j in range(structure.n_factors):
        nz = np.nonzero(coeffs[j])[0]
        if "LB" in kinds:
            for i in nz:
                out.append(score_local_bound(space, current, j, int(i), coeffs))
        if "LC" in kinds:
            for ai in range(len(nz)):
                for bi in range(ai + 1, len(nz)):
                    s = score_local_comparison(space, current, j, int(nz[ai]), int(nz[bi]), coeffs)
                    if s is not None:
                        out.append(s)
        if "AB" in kinds:
            out.append(score_anchor_bound(space, current, j, "top", coeffs))
            out.append(score_anchor_bound(space, current, j, "bottom", coeffs))
    if weights:
        out = [
            QueryScore(s.query, s.score * weights.get(s.query.kind, 1.0), s.sort_key)
            for s in out
        ]
    return out


def _best(cands: list[QueryScore]) -> Optional[QueryScore]:
    positive = [c for c in cands if c.score > 0]
    if not positive:
        return None
    return min(positive, key=lambda c: (-c.score, c.sort_key))


def _unknown_pairs(space: UtilitySpace) -> list[LocalComparisonQuery]:
    """Every same-factor pair with no known relation (the random LC pool)."""
    out = []
    for j in range(space.structure.n_factors):
        n = space.structure.factor_sizes[j]
        for i in range(n):
            for k in range(i + 1, n):
                if space.known_relation(ParamRef("local", j, i), ParamRef("local", j, k)) is None:
                    out.append(LocalComparisonQuery(j, i, k))
    return out


def select_query(
    space: UtilitySpace,
    current: MinimaxResult,
    strategy: str,
    rng: np.random.Generator,
    cost_weights: Optional[dict[str, float]] = None,
) -> Optional[Query]:
    """Pick the next query per strategy; None ends the session.

    LC falls back to a uniformly random unknown-relation pair when no scored
    comparison is available; LC(LB) falls back to the best bound query; mixed
    strategies take the highest score across their allowed types, ties broken
    by (factor, parameter) ascending.
    """
    if strategy not in STRATEGIES:
        raise RegretkitError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    if strategy == "LB":
        best = _best(_candidates(space, current, ("LB",), cost_weights))
        return best.query if best else None
    if strategy == "LC":
        best = _best(_candidates(space, current, ("LC",), cost_weights))
        if best:
            return best.query
        pool = _unknown_pairs(space)
        if not pool:
            return None
        return pool[int(rng.integers(0, len(pool)))]
    if strategy == "LC(LB)":
        best = _best(_candidates(space, current, ("LC",), cost_weights))
        if best:
            return best.query
        best = _best(_candidates(space, current, ("LB",), cost_weights))
        return best.query if best else None
    if strategy == "random":
        pool: list[Query] = [c.query for c in _candidates(space, current, ("LB", "AB"), cost_weights) if c.score > 0]
        pool.extend(q for q in _unknown_pairs(space))
        if not pool:
            return None
        return pool[int(rng.integers(0, len(pool)))]
    kinds = tuple(k for k in ("AB", "LC", "LB") if k in strategy.split("+"))
    best = _best(_candidates(space, current, kinds, cost_weights))
    return best.query if best else None


# -- sessions ------------------------------------------------------------------


@dataclass(frozen=True)
class Termination:
    threshold: float = 0.0
    max_queries: int = 100


@dataclass
class TraceStep:
    index: int
    query: Optional[Query]
    answer: Optional[bool]
    mmr: float
    x_star: Outcome = ()
    witness: Outcome = ()


class ElicitationSession:
    """One interactive run: select a query, take the answer, recompute regret.

    The MMR trace is non-increasing because every consistent answer shrinks
    the polytope.  All randomness (the LC fallback) comes from one generator
    seeded at construction, so identical answers replay identically.
    """

    def __init__(
        self,
        structure: GaiStructure,
        space: UtilitySpace,
        feas: FeasibilitySpec,
        strategy: str,
        termination: Termination = Termination(),
        seed: int = 0,
        cost_weights: Optional[dict[str, float]] = None,
    ):
        self.structure = structure
        self.feas = feas
        self.strategy = strategy
        self.termination = termination
        self.seed = seed
        self.cost_weights = cost_weights
        self.rng = np.random.default_rng(seed)
        self.space = space
        self._witness_pool: list[Outcome] = []
        self.current: MinimaxResult = self._solve(space)
        self.history: list[tuple[Query, bool]] = []
        self.trace: list[TraceStep] = [
            TraceStep(0, None, None, self.current.value, self.current.x_star, self.current.witness)
        ]

    def _solve(self, space: UtilitySpace) -> MinimaxResult:
        """Minimax with the adversary pool of earlier steps as seed cuts; the
        pool only accelerates constraint generation, never changes results."""
        result = minimax_regret(space, self.feas, seed_witnesses=tuple(self._witness_pool))
        pool = dict.fromkeys(self._witness_pool)
        for cut in result.trace:
            pool[cut.witness] = None
        self._witness_pool = list(pool)[-64:]
        return result

    @property
    def query_count(self) -> int:
        return len(self.history)

    def done(self) -> Optional[str]:
        if self.current.value <= self.termination.threshold:
            return "threshold"
        if self.query_count >= self.termination.max_queries:
            return "max-queries"
        return None

    def select_query(self) -> Optional[Query]:
        return select_query(self.space, self.current, self.strategy, self.rng, self.cost_weights)

    def apply_response(self, query: Query, answer: bool) -> MinimaxResult:
        """Assert the implied constraint and recompute; inconsistent answers
        propagate as errors and leave the session unchanged."""
        new_space = self.space.assert_constraint(query.constraint(answer))
        current = self._solve(new_space)
        self.space = new_space
        self.current = current
        self.history.append((query, answer))
        self.trace.append(
            TraceStep(
                len(self.history), query, answer,
                self.current.value, self.current.x_star, self.current.witness,
            )
        )
        return self.current

    def run(self, answerer: Callable[[Query], bool]) -> MinimaxResult:
        """Loop until threshold, query budget, or query exhaustion."""
        while self.done() is None:
            q = self.select_query()
            if q is None:
                break
            self.apply_response(q, bool(answerer(q)))
        return self.current
