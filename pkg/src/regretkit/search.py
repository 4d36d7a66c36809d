"""Combinatorial optimization over feasible configurations.

Feasible sets come in two modes: a constraint space carved out of the full
outcome grid by nogoods (forbidden partial assignments), or an explicit item
catalog.  The two optimizers share one semantic core: minimize over feasible
outcomes the maximum over scenarios of a sum of per-factor table lookups.
Maximization of a single table set is the same problem on negated tables.

The constraint-space search is a depth-first branch-and-bound over attribute
assignments in schema order with admissible per-factor completion bounds; it
returns the lexicographically smallest optimum.  The hot loop lives in a
compiled kernel with a pure-Python twin (see regretkit._kernels); a plain
enumeration reference path is kept here as the oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import numpy as np

from ._kernels import KERNEL_BACKEND, impact_order, run_min_max_search
from .errors import EmptyFeasibleSetError, SchemaError
from .model import GaiStructure
from .schema import AttributeSchema, Outcome

Nogood = tuple[tuple[int, int], ...]  # ((attribute, level), ...), attributes distinct


@dataclass(frozen=True)
class FeasibilitySpec:
    """Hard-constraint description of the feasible outcome set."""

    nogoods: Optional[tuple[Nogood, ...]] = None
    catalog: Optional[tuple[Outcome, ...]] = None

    def __post_init__(self):
        if (self.nogoods is None) == (self.catalog is None):
            raise SchemaError("exactly one of nogoods/catalog must be given")
        if self.nogoods is not None:
            for g in self.nogoods:
                if len(g) == 0:
                    raise SchemaError("a nogood must assign at least one attribute")
                attrs = [a for a, _ in g]
                if len(set(attrs)) != len(attrs):
                    raise SchemaError("a nogood must not assign an attribute twice")
        if self.catalog is not None and len(self.catalog) == 0:
            raise SchemaError("catalog mode needs at least one item")

    @classmethod
    def constraint_space(cls, nogoods: Sequence[Sequence[tuple[int, int]]] = ()) -> "FeasibilitySpec":
        return cls(nogoods=tuple(tuple(sorted((int(a), int(v)) for a, v in g)) for g in nogoods))

    @classmethod
    def explicit_catalog(cls, items: Sequence[Sequence[int]]) -> "FeasibilitySpec":
        return cls(catalog=tuple(tuple(int(v) for v in it) for it in items))

    @property
    def mode(self) -> str:
        return "catalog" if self.catalog is not None else "constraints"

    def validate(self, schema: AttributeSchema) -> None:
        if self.nogoods is not None:
            for g in self.nogoods:
                for a, v in g:
                    if not 0 <= a < schema.n_attributes:
                        raise SchemaError(f"nogood references unknown attribute {a}")
                    if not 0 <= v < schema.domain_sizes[a]:
                        raise SchemaError(f"nogood level {v} out of range for attribute {a}")
        else:
            for it in self.catalog:
                schema.check_outcome(it, "catalog item")


def is_feasible(feas: FeasibilitySpec, x: Sequence[int]) -> bool:
    xt = tuple(int(v) for v in x)
    if feas.catalog is not None:
        return xt in set(feas.catalog)
    return all(any(xt[a] != v for a, v in g) for g in feas.nogoods)


def iter_feasible(schema: AttributeSchema, feas: FeasibilitySpec) -> Iterator[Outcome]:
    """All feasible outcomes in lexicographic order (constraint mode)."""
    if feas.catalog is not None:
        yield from sorted(set(feas.catalog))
        return
    sizes = schema.domain_sizes
    nogoods = feas.nogoods
    assignment = [0] * len(sizes)

    def rec(d: int):
        if d == len(sizes):
            yield tuple(assignment)
            return
        for level in range(sizes[d]):
            assignment[d] = level
            dead = False
            for g in nogoods:
                if all(a <= d and assignment[a] == v for a, v in g):
                    dead = True
                    break
            if not dead:
                yield from rec(d + 1)

    yield from rec(0)


# -- table optimizers ------------------------------------------------------


def minimize_max_tables(
    structure: GaiStructure,
    feas: FeasibilitySpec,
    scenarios: Sequence[Sequence[np.ndarray]],
    warm: Optional[tuple[float, Outcome]] = None,
    repair_ties: bool = True,
) -> tuple[float, Outcome]:
    """min over feasible x of max over scenarios of sum_j table[t][j][code_j(x)].

    With an empty scenario list the value is 0 at the lexicographically
    smallest feasible outcome.  Raises EmptyFeasibleSetError when nothing is
    feasible.  warm is an optional known-feasible incumbent (value must be its
    exact scenario max); it accelerates the search without changing results.

    The search explores attributes in a table-derived impact order, which can
    be orders of magnitude faster than schema order.  repair_ties then runs a
    warm-started schema-order pass so ties resolve to the lexicographically
    smallest optimum; with repair_ties=False the (still deterministic)
    impact-order tie-break is kept, which intermediate constraint-generation
    masters use since any optimum serves them equally.
    """
    if feas.catalog is not None:
        return _catalog_min_max(structure, feas.catalog, scenarios)
    tables = [[np.asarray(t, dtype=float) for t in scen] for scen in scenarios]
    tables = _drop_dominated(tables)
    if not tables:
        tables = [[np.zeros(n) for n in structure.factor_sizes]]
        warm = None
    sizes = structure.schema.domain_sizes
    order = impact_order(sizes, structure.factors, tables)
    value, assignment = run_min_max_search(
        sizes, structure.factors, tables, feas.nogoods, warm=warm, order=order
    )
    if assignment is None:
        raise EmptyFeasibleSetError("hard constraints admit no configuration")
    if repair_ties and order != sorted(order):
        value, assignment = run_min_max_search(
            sizes, structure.factors, tables, feas.nogoods, warm=(value, assignment)
        )
    return value, tuple(int(v) for v in assignment)


def _drop_dominated(tables):
    """Remove scenarios pointwise-dominated per factor; the max is unchanged."""
    kept: list = []
    for scen in tables:
        dominated = False
        for other in kept:
            if all(np.all(s <= o + 1e-15) for s, o in zip(scen, other)):
                dominated = True
                break
        if not dominated:
            kept = [
                o for o in kept
                if not all(np.all(ot <= st + 1e-15) for st, ot in zip(scen, o))
            ]
            kept.append(scen)
    return kept


def maximize_tables(
    structure: GaiStructure,
    feas: FeasibilitySpec,
    tables: Sequence[np.ndarray],
) -> tuple[float, Outcome]:
    """max over feasible x of sum_j tables[j][code_j(x)] (lex-smallest argmax)."""
    value, outcome = minimize_max_tables(
        structure, feas, [[-np.asarray(t, dtype=float) for t in tables]]
    )
    return -value, outcome


def first_feasible(structure: GaiStructure, feas: FeasibilitySpec) -> Outcome:
    """Deterministic seed configuration: the lexicographically smallest feasible."""
    _, outcome = minimize_max_tables(structure, feas, [])
    return outcome


def _catalog_min_max(structure, catalog, scenarios) -> tuple[float, Outcome]:
    items = sorted(set(catalog))
    grid = np.array(items, dtype=np.int64)
    if not scenarios:
        return 0.0, tuple(int(v) for v in items[0])
    values = np.full(len(items), -np.inf)
    for scen in scenarios:
        total = np.zeros(len(items))
        for j, codec in enumerate(structure.codecs):
            codes = codec.encode_grid(grid)
            total += np.asarray(scen[j], dtype=float)[codes]
        values = np.maximum(values, total)
    best = min(range(len(items)), key=lambda i: (values[i], items[i]))
    return float(values[best]), tuple(int(v) for v in items[best])


# -- plain-enumeration reference path (the oracle) -------------------------


def minimize_max_reference(
    structure: GaiStructure,
    feas: FeasibilitySpec,
    scenarios: Sequence[Sequence[np.ndarray]],
) -> tuple[float, Outcome]:
    """Same contract as minimize_max_tables, by exhaustive enumeration."""
    best_val = None
    best_out = None
    for x in iter_feasible(structure.schema, feas):
        if feas.catalog is None or is_feasible(feas, x):
            codes = [codec.encode(x) for codec in structure.codecs]
            if scenarios:
                val = max(
                    sum(float(scen[j][codes[j]]) for j in range(structure.n_factors))
                    for scen in scenarios
                )
            else:
                val = 0.0
            if best_val is None or val < best_val:
                best_val, best_out = val, x
    if best_out is None:
        raise EmptyFeasibleSetError("hard constraints admit no configuration")
    return best_val, best_out


def maximize_reference(structure, feas, tables) -> tuple[float, Outcome]:
    value, outcome = minimize_max_reference(structure, feas, [[-np.asarray(t) for t in tables]])
    return -value, outcome


def kernel_backend() -> str:
    """Which search kernel is active: "compiled" or "python"."""
    return KERNEL_BACKEND
