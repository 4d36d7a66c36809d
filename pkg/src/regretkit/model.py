"""Canonical GAI utility models.

A utility over a multiattribute outcome space decomposes into a sum of factor
terms, one per (possibly overlapping) attribute subset I_j:

    u(x) = sum_j (top_j - bottom_j) * ubar_j(x_j)

where ubar_j is an integer-weighted combination of the factor's local values.
The integer weights come from an inclusion-exclusion expansion over the factor's
*relevant predecessors* (earlier factors sharing at least one attribute): each
non-empty predecessor subset S contributes (-1)^|S| at the local code of x_j
restricted to the joint intersection, with attributes outside the intersection
reset to reference levels.  An empty joint intersection lands on the factor's
all-reference configuration.  Disjoint factors therefore get an identity table.

Weights depend on the factor ordering; the ordering of the problem document is
authoritative and preserved everywhere.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DegenerateFactorError, SchemaError
from .schema import AttributeSchema, LocalCodec, Outcome

VALUE_TOL = 1e-9


def build_conditioning_sets(
    factors: Sequence[Sequence[int]], n_attributes: int
) -> tuple[frozenset[int], ...]:
    """Per factor: attributes outside it that co-occur with it in some factor."""
    sets = [set(f) for f in factors]
    covered = set().union(*sets) if sets else set()
    missing = set(range(n_attributes)) - covered
    if missing:
        raise SchemaError(f"attributes not covered by any factor: {sorted(missing)}")
    out = []
    for j, fj in enumerate(sets):
        cond: set[int] = set()
        for k, fk in enumerate(sets):
            if k != j and fj & fk:
                cond |= fk
        out.append(frozenset(cond - fj))
    return tuple(out)


@dataclass(frozen=True)
class GaiStructure:
    """Ordered factor decomposition over a schema, with declared local anchors.

    local_top / local_bottom are dense local codes (see LocalCodec); the
    declared bottom is the code whose local value is pinned to 0, the top to 1.
    """

    schema: AttributeSchema
    factors: tuple[tuple[int, ...], ...]
    local_top: tuple[int, ...]
    local_bottom: tuple[int, ...]

    def __post_init__(self):
        if not self.factors:
            raise SchemaError("at least one factor required")
        n = self.schema.n_attributes
        for j, f in enumerate(self.factors):
            if list(f) != sorted(set(f)):
                raise SchemaError(f"factor {j} must list distinct ascending attributes")
            if any(not 0 <= a < n for a in f):
                raise SchemaError(f"factor {j} references an unknown attribute")
        build_conditioning_sets(self.factors, n)  # raises on uncovered attributes
        if not (len(self.local_top) == len(self.local_bottom) == len(self.factors)):
            raise SchemaError("local_top/local_bottom must be given per factor")
        for j, codec in enumerate(self.codecs):
            for label, code in (("local_top", self.local_top[j]), ("local_bottom", self.local_bottom[j])):
                if not 0 <= code < codec.n_configs:
                    raise SchemaError(f"factor {j}: {label} code {code} out of range")
            if self.local_top[j] == self.local_bottom[j]:
                raise SchemaError(f"factor {j}: local_top equals local_bottom")

    @property
    def n_factors(self) -> int:
        return len(self.factors)

    @property
    def codecs(self) -> tuple[LocalCodec, ...]:
        sizes = self.schema.domain_sizes
        return tuple(
            LocalCodec(tuple(f), tuple(sizes[a] for a in f)) for f in self.factors
        )

    @property
    def factor_sizes(self) -> tuple[int, ...]:
        return tuple(c.n_configs for c in self.codecs)

    @property
    def conditioning_sets(self) -> tuple[frozenset[int], ...]:
        return build_conditioning_sets(self.factors, self.schema.n_attributes)


@dataclass(frozen=True)
class CoefficientTable:
    """Per factor, a dense (n_configs x n_configs) integer matrix.

    Row `code` holds the weights of every local-value parameter in the factor
    term for input configuration `code`; most entries are zero.
    """

    matrices: tuple[np.ndarray, ...]

    def mapping(self, j: int, code: int) -> dict[int, int]:
        row = self.matrices[j][code]
        return {int(i): int(c) for i, c in zip(np.nonzero(row)[0], row[np.nonzero(row)[0]])}


def compute_coefficients(structure: GaiStructure) -> CoefficientTable:
    schema = structure.schema
    matrices = []
    factor_sets = [set(f) for f in structure.factors]
    for j, codec in enumerate(structure.codecs):
        n = codec.n_configs
        mat = np.zeros((n, n), dtype=np.int64)
        relevant = [k for k in range(j) if factor_sets[k] & factor_sets[j]]
        # pre-resolve each predecessor subset to a projection of the factor tuple
        subset_projections: list[tuple[int, frozenset[int]]] = []
        for r in range(1, len(relevant) + 1):
            for S in itertools.combinations(relevant, r):
                inter = factor_sets[j].intersection(*[factor_sets[k] for k in S])
                subset_projections.append(((-1) ** r, frozenset(inter)))
        ref_levels = tuple(schema.reference[a] for a in codec.attrs)
        for code in range(n):
            mat[code, code] += 1
            levels = codec.decode(code)
            for sign, keep in subset_projections:
                projected = tuple(
                    lvl if a in keep else ref
                    for a, lvl, ref in zip(codec.attrs, levels, ref_levels)
                )
                target = 0
                for lvl, s in zip(projected, codec.sizes):
                    target = target * s + lvl
                mat[code, target] += sign
        matrices.append(mat)
    return CoefficientTable(tuple(matrices))


@functools.lru_cache(maxsize=256)
def coefficient_table(structure: GaiStructure) -> CoefficientTable:
    """Memoized compute_coefficients; structures are immutable and hashable."""
    return compute_coefficients(structure)


@dataclass(frozen=True)
class GaiModel:
    """A fully specified canonical GAI utility.

    local_values[j][i] is the local value of configuration code i in factor j,
    normalized so the declared top is 1 and bottom is 0.  anchor_top/bottom are
    the global utilities of the factor's best/worst outcomes with everything
    else at reference; their difference scales the factor term.
    """

    structure: GaiStructure
    local_values: tuple[np.ndarray, ...]
    anchor_top: np.ndarray
    anchor_bottom: np.ndarray
    coefficients: CoefficientTable = field(repr=False)

    def __post_init__(self):
        m = self.structure.n_factors
        if not (len(self.local_values) == len(self.anchor_top) == len(self.anchor_bottom) == m):
            raise SchemaError("per-factor parameter arrays must match factor count")
        for j, v in enumerate(self.local_values):
            if len(v) != self.structure.factor_sizes[j]:
                raise SchemaError(f"factor {j}: wrong number of local values")
            if np.any(v < -VALUE_TOL) or np.any(v > 1 + VALUE_TOL):
                raise SchemaError(f"factor {j}: local values must lie in [0, 1]")
            if abs(v[self.structure.local_top[j]] - 1.0) > VALUE_TOL:
                raise SchemaError(f"factor {j}: declared top must have local value 1")
            if abs(v[self.structure.local_bottom[j]]) > VALUE_TOL:
                raise SchemaError(f"factor {j}: declared bottom must have local value 0")
        if np.any(self.anchor_top < self.anchor_bottom - VALUE_TOL):
            raise SchemaError("anchor_top must be >= anchor_bottom for every factor")

    @classmethod
    def build(
        cls,
        structure: GaiStructure,
        local_values: Sequence[Sequence[float]],
        anchor_top: Sequence[float],
        anchor_bottom: Sequence[float],
    ) -> "GaiModel":
        return cls(
            structure=structure,
            local_values=tuple(np.asarray(v, dtype=float) for v in local_values),
            anchor_top=np.asarray(anchor_top, dtype=float),
            anchor_bottom=np.asarray(anchor_bottom, dtype=float),
            coefficients=compute_coefficients(structure),
        )

    @property
    def weights(self) -> np.ndarray:
        return self.anchor_top - self.anchor_bottom

    def unscaled_subutility(self, j: int, code: int) -> float:
        return float(self.coefficients.matrices[j][code] @ self.local_values[j])

    def evaluate(self, outcome: Sequence[int]) -> float:
        total = 0.0
        for j, codec in enumerate(self.structure.codecs):
            code = codec.encode(outcome)
            total += self.weights[j] * self.unscaled_subutility(j, code)
        return total

    def evaluate_grid(self, grid: np.ndarray) -> np.ndarray:
        """Vectorized evaluate over an (P, n_attributes) outcome array."""
        total = np.zeros(len(grid))
        for j, codec in enumerate(self.structure.codecs):
            codes = codec.encode_grid(grid)
            table = self.coefficients.matrices[j] @ self.local_values[j]
            total += self.weights[j] * table[codes]
        return total

    def factor_tables(self) -> list[np.ndarray]:
        """Per factor, the scaled term value for every local code."""
        return [
            self.weights[j] * (self.coefficients.matrices[j] @ self.local_values[j])
            for j in range(self.structure.n_factors)
        ]


@dataclass(frozen=True)
class CanonicalFit:
    """Result of extracting canonical parameters from a utility oracle."""

    model: GaiModel
    max_abs_error: float
    exact: bool
    normalized: Callable[[Outcome], float] = field(repr=False)


def canonical_from_oracle(
    u: Callable[[Sequence[int]], float],
    schema: AttributeSchema,
    factors: Sequence[Sequence[int]],
    tol: float = 1e-6,
) -> CanonicalFit:
    """Recover canonical parameters from a black-box utility.

    The oracle is normalized so its enumerated best outcome maps to 1 and its
    worst to 0; local tops/bottoms are found by enumeration with conditioning
    attributes held at reference.  The returned fit reports the maximum
    reconstruction error over all outcomes: zero (up to rounding) whenever the
    oracle is GAI over the given factors and the schema reference is a worst
    outcome, and nonzero otherwise (the model is still returned).
    """
    grid = schema.outcome_grid()
    values = np.array([u(tuple(row)) for row in grid], dtype=float)
    vmin, vmax = values.min(), values.max()
    if vmax - vmin <= VALUE_TOL:
        raise DegenerateFactorError("constant utility: every factor is degenerate")
    normalized_values = (values - vmin) / (vmax - vmin)
    best = tuple(int(v) for v in grid[int(np.argmax(values))])
    worst = tuple(int(v) for v in grid[int(np.argmin(values))])
    schema = AttributeSchema(
        attributes=schema.attributes,
        reference=schema.reference,
        global_best=best,
        global_worst=worst,
    )

    strides = np.array([1] * schema.n_attributes, dtype=np.int64)
    acc = 1
    for i in reversed(range(schema.n_attributes)):
        strides[i] = acc
        acc *= schema.domain_sizes[i]

    def normalized_at(outcome: Sequence[int]) -> float:
        idx = int(np.dot(np.asarray(outcome, dtype=np.int64), strides))
        return float(normalized_values[idx])

    local_values = []
    tops, bottoms = [], []
    anchor_top, anchor_bottom = [], []
    sizes = schema.domain_sizes
    for f in factors:
        codec = LocalCodec(tuple(f), tuple(sizes[a] for a in f))
        locals_ = np.array(
            [normalized_at(codec.embed(code, schema)) for code in range(codec.n_configs)]
        )
        top = int(np.argmax(locals_))
        bottom = int(np.argmin(locals_))
        span = locals_[top] - locals_[bottom]
        if span <= VALUE_TOL:
            raise DegenerateFactorError(
                f"factor {tuple(f)} is locally constant under the reference context"
            )
        local_values.append((locals_ - locals_[bottom]) / span)
        tops.append(top)
        bottoms.append(bottom)
        anchor_top.append(float(locals_[top]))
        anchor_bottom.append(float(locals_[bottom]))

    structure = GaiStructure(
        schema=schema,
        factors=tuple(tuple(f) for f in factors),
        local_top=tuple(tops),
        local_bottom=tuple(bottoms),
    )
    model = GaiModel.build(structure, local_values, anchor_top, anchor_bottom)
    reconstructed = model.evaluate_grid(grid)
    max_err = float(np.max(np.abs(reconstructed - normalized_values)))
    return CanonicalFit(
        model=model,
        max_abs_error=max_err,
        exact=max_err <= tol,
        normalized=normalized_at,
    )
