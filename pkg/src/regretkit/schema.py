"""Multiattribute outcome spaces.

An outcome is a tuple of level indices, one per attribute, in schema order.
Factor-local configurations are addressed by a dense code: the big-endian
mixed-radix encoding of the factor's level tuple, attributes in schema order.
That encoding is part of the on-disk format and must stay stable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import SchemaError

Outcome = tuple[int, ...]


@dataclass(frozen=True)
class Attribute:
    name: str
    levels: tuple[str, ...]

    def __post_init__(self):
        if len(self.levels) < 2:
            raise SchemaError(f"attribute {self.name!r} needs >= 2 levels")
        if len(set(self.levels)) != len(self.levels):
            raise SchemaError(f"attribute {self.name!r} has duplicate levels")


@dataclass(frozen=True)
class AttributeSchema:
    """Attributes plus the three distinguished outcomes: reference, best, worst."""

    attributes: tuple[Attribute, ...]
    reference: Outcome
    global_best: Outcome
    global_worst: Outcome

    def __post_init__(self):
        names = [a.name for a in self.attributes]
        if len(set(names)) != len(names):
            raise SchemaError("duplicate attribute names")
        for label, out in (
            ("reference", self.reference),
            ("global_best", self.global_best),
            ("global_worst", self.global_worst),
        ):
            self.check_outcome(out, label)

    @property
    def n_attributes(self) -> int:
        return len(self.attributes)

    @property
    def domain_sizes(self) -> tuple[int, ...]:
        return tuple(len(a.levels) for a in self.attributes)

    @property
    def n_outcomes(self) -> int:
        return int(np.prod(self.domain_sizes, dtype=np.int64))

    def check_outcome(self, outcome: Sequence[int], label: str = "outcome") -> Outcome:
        out = tuple(int(v) for v in outcome)
        if len(out) != self.n_attributes:
            raise SchemaError(f"{label} has {len(out)} levels, expected {self.n_attributes}")
        for i, v in enumerate(out):
            if not 0 <= v < len(self.attributes[i].levels):
                raise SchemaError(
                    f"{label}: level {v} out of range for attribute {self.attributes[i].name!r}"
                )
        return out

    def attribute_index(self, name: str) -> int:
        for i, a in enumerate(self.attributes):
            if a.name == name:
                return i
        raise SchemaError(f"unknown attribute {name!r}")

    def outcome_from_names(self, levels: Sequence[str], label: str = "outcome") -> Outcome:
        if len(levels) != self.n_attributes:
            raise SchemaError(f"{label} has {len(levels)} levels, expected {self.n_attributes}")
        out = []
        for attr, name in zip(self.attributes, levels):
            if name not in attr.levels:
                raise SchemaError(f"{label}: {name!r} not a level of {attr.name!r}")
            out.append(attr.levels.index(name))
        return tuple(out)

    def outcome_names(self, outcome: Sequence[int]) -> tuple[str, ...]:
        return tuple(self.attributes[i].levels[v] for i, v in enumerate(outcome))

    def iter_outcomes(self) -> Iterator[Outcome]:
        sizes = self.domain_sizes
        out = [0] * len(sizes)
        while True:
            yield tuple(out)
            for i in reversed(range(len(sizes))):
                out[i] += 1
                if out[i] < sizes[i]:
                    break
                out[i] = 0
            else:
                return

    def outcome_grid(self) -> np.ndarray:
        """All outcomes as an (n_outcomes, n_attributes) int array, row-major order."""
        sizes = self.domain_sizes
        grids = np.meshgrid(*[np.arange(d) for d in sizes], indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1).astype(np.int64)


def project(outcome: Sequence[int], keep: Sequence[int], schema: AttributeSchema) -> Outcome:
    """Keep the given attributes, reset the rest to the reference level."""
    keep_set = set(keep)
    return tuple(
        int(v) if i in keep_set else schema.reference[i] for i, v in enumerate(outcome)
    )


@dataclass(frozen=True)
class LocalCodec:
    """Dense codes for one factor's local configurations."""

    attrs: tuple[int, ...]          # ascending attribute indices
    sizes: tuple[int, ...]          # domain sizes, same order

    @property
    def n_configs(self) -> int:
        n = 1
        for s in self.sizes:
            n *= s
        return n

    def encode(self, outcome: Sequence[int]) -> int:
        code = 0
        for a, s in zip(self.attrs, self.sizes):
            code = code * s + int(outcome[a])
        return code

    def decode(self, code: int) -> tuple[int, ...]:
        levels = [0] * len(self.attrs)
        for i in reversed(range(len(self.attrs))):
            levels[i] = code % self.sizes[i]
            code //= self.sizes[i]
        return tuple(levels)

    def embed(self, code: int, schema: AttributeSchema) -> Outcome:
        """Full outcome with this local configuration and reference elsewhere."""
        out = list(schema.reference)
        for a, lvl in zip(self.attrs, self.decode(code)):
            out[a] = lvl
        return tuple(out)

    def encode_grid(self, grid: np.ndarray) -> np.ndarray:
        """Vectorized encode for an (P, n_attributes) outcome array."""
        codes = np.zeros(len(grid), dtype=np.int64)
        for a, s in zip(self.attrs, self.sizes):
            codes = codes * s + grid[:, a]
        return codes
