"""The feasible utility polytope and its per-block geometry.

Parameters split into independent blocks: one block of local values per factor
(interval + same-factor comparison constraints) and one anchor block (intervals,
the structural top >= bottom pair per factor, and cross-factor comparisons from
anchor queries).  Spaces are immutable; asserting a constraint returns a new
space that shares every untouched block's caches, so tightening one factor
never recomputes the others.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np

from . import smalllp
from .errors import InconsistentConstraintError, SchemaError
from .model import GaiStructure

KNOWN_TOL = 1e-12

ParamKind = Literal["local", "anchor_top", "anchor_bottom"]


@dataclass(frozen=True)
class ParamRef:
    kind: ParamKind
    factor: int
    index: int = 0  # local configuration code; unused for anchors

    def __post_init__(self):
        if self.kind not in ("local", "anchor_top", "anchor_bottom"):
            raise SchemaError(f"unknown parameter kind {self.kind!r}")

    def to_json(self) -> dict:
        d = {"kind": self.kind, "factor": self.factor}
        if self.kind == "local":
            d["index"] = self.index
        return d

    @classmethod
    def from_json(cls, d: dict) -> "ParamRef":
        return cls(kind=d["kind"], factor=int(d["factor"]), index=int(d.get("index", 0)))


@dataclass(frozen=True)
class BoundConstraint:
    """Tightens one parameter's interval: lo <= p and/or p <= hi."""

    param: ParamRef
    lo: Optional[float] = None
    hi: Optional[float] = None

    def to_json(self) -> dict:
        return {"type": "bound", "param": self.param.to_json(), "lo": self.lo, "hi": self.hi}


@dataclass(frozen=True)
class ComparisonConstraint:
    """greater >= lesser.  Local comparisons must stay within one factor."""

    greater: ParamRef
    lesser: ParamRef

    def to_json(self) -> dict:
        return {
            "type": "comparison",
            "greater": self.greater.to_json(),
            "lesser": self.lesser.to_json(),
        }


Constraint = BoundConstraint | ComparisonConstraint


def constraint_from_json(d: dict) -> Constraint:
    if d["type"] == "bound":
        return BoundConstraint(
            param=ParamRef.from_json(d["param"]),
            lo=d.get("lo"),
            hi=d.get("hi"),
        )
    if d["type"] == "comparison":
        return ComparisonConstraint(
            greater=ParamRef.from_json(d["greater"]),
            lesser=ParamRef.from_json(d["lesser"]),
        )
    raise SchemaError(f"unknown constraint type {d.get('type')!r}")


@dataclass(frozen=True)
class HyperBox:
    """Per-parameter tightest intervals of one block; contains the polytope."""

    lo: np.ndarray
    hi: np.ndarray

    @property
    def gap(self) -> np.ndarray:
        return self.hi - self.lo


BlockKey = tuple  # ("factor", j) | ("anchors",)
ANCHOR_DEFAULT_BOUNDS = (0.0, 1.0)


@dataclass(frozen=True, eq=False)
class UtilitySpace:
    """Feasible utility polytope; consistency is re-verified on every assertion."""

    structure: GaiStructure
    lvf_lo: tuple[np.ndarray, ...]
    lvf_hi: tuple[np.ndarray, ...]
    lvf_edges: tuple[tuple[tuple[int, int], ...], ...]  # per factor, (greater, lesser) codes
    anchor_lo: np.ndarray  # shape (m, 2): columns top, bottom
    anchor_hi: np.ndarray
    anchor_edges: tuple[tuple[int, int], ...]  # flat ids 2j (top) / 2j+1 (bottom)
    _cache: dict = field(default_factory=dict, repr=False)

    # -- construction ------------------------------------------------------

    @classmethod
    def initial(
        cls,
        structure: GaiStructure,
        lvf_lo=None,
        lvf_hi=None,
        anchor_lo=None,
        anchor_hi=None,
    ) -> "UtilitySpace":
        """Build the prior polytope; structural pins override supplied priors.

        Absent priors default to [0, 1] boxes for local values and to
        ANCHOR_DEFAULT_BOUNDS for both anchors of every factor.
        """
        m = structure.n_factors
        sizes = structure.factor_sizes
        lo = [np.zeros(n) if lvf_lo is None else np.asarray(lvf_lo[j], dtype=float).copy()
              for j, n in enumerate(sizes)]
        hi = [np.ones(n) if lvf_hi is None else np.asarray(lvf_hi[j], dtype=float).copy()
              for j, n in enumerate(sizes)]
        for j in range(m):
            if len(lo[j]) != sizes[j] or len(hi[j]) != sizes[j]:
                raise SchemaError(f"factor {j}: prior bounds have wrong length")
            lo[j][structure.local_top[j]] = 1.0
            hi[j][structure.local_top[j]] = 1.0
            lo[j][structure.local_bottom[j]] = 0.0
            hi[j][structure.local_bottom[j]] = 0.0
        a_lo = (np.full((m, 2), ANCHOR_DEFAULT_BOUNDS[0]) if anchor_lo is None
                else np.asarray(anchor_lo, dtype=float).copy())
        a_hi = (np.full((m, 2), ANCHOR_DEFAULT_BOUNDS[1]) if anchor_hi is None
                else np.asarray(anchor_hi, dtype=float).copy())
        if a_lo.shape != (m, 2) or a_hi.shape != (m, 2):
            raise SchemaError("anchor priors must have shape (n_factors, 2)")
        space = cls(
            structure=structure,
            lvf_lo=tuple(lo),
            lvf_hi=tuple(hi),
            lvf_edges=tuple(() for _ in range(m)),
            anchor_lo=a_lo,
            anchor_hi=a_hi,
            anchor_edges=(),
        )
        for j in range(m):
            space._closure(("factor", j))
        space._closure(("anchors",))
        return space

    # -- block plumbing ----------------------------------------------------

    def _anchor_flat(self) -> tuple[np.ndarray, np.ndarray, tuple[tuple[int, int], ...]]:
        m = self.structure.n_factors
        lo = self.anchor_lo.reshape(2 * m)
        hi = self.anchor_hi.reshape(2 * m)
        structural = tuple((2 * j, 2 * j + 1) for j in range(m))
        return lo, hi, structural + self.anchor_edges

    def _block(self, key: BlockKey):
        if key[0] == "factor":
            j = key[1]
            return self.lvf_lo[j], self.lvf_hi[j], self.lvf_edges[j]
        return self._anchor_flat()

    def _closure(self, key: BlockKey) -> smalllp.TightBounds:
        got = self._cache.get(("closure", *key))
        if got is None:
            lo, hi, edges = self._block(key)
            got = smalllp.close_system(lo, hi, edges)
            self._cache[("closure", *key)] = got
        return got

    def _param_flat_id(self, p: ParamRef) -> tuple[BlockKey, int]:
        if p.kind == "local":
            if not 0 <= p.factor < self.structure.n_factors:
                raise SchemaError(f"unknown factor {p.factor}")
            n = self.structure.factor_sizes[p.factor]
            if not 0 <= p.index < n:
                raise SchemaError(f"local index {p.index} out of range for factor {p.factor}")
            return ("factor", p.factor), p.index
        if not 0 <= p.factor < self.structure.n_factors:
            raise SchemaError(f"unknown factor {p.factor}")
        return ("anchors",), 2 * p.factor + (0 if p.kind == "anchor_top" else 1)

    def _updated(self, touched: BlockKey, **overrides) -> "UtilitySpace":
        """New space sharing untouched blocks and their cached geometry."""
        cache = {k: v for k, v in self._cache.items() if k[1:1 + len(touched)] != touched}
        fields = dict(
            structure=self.structure,
            lvf_lo=self.lvf_lo,
            lvf_hi=self.lvf_hi,
            lvf_edges=self.lvf_edges,
            anchor_lo=self.anchor_lo,
            anchor_hi=self.anchor_hi,
            anchor_edges=self.anchor_edges,
        )
        fields.update(overrides)
        return UtilitySpace(_cache=cache, **fields)

    # -- assertions --------------------------------------------------------

    def assert_constraint(self, c: Constraint) -> "UtilitySpace":
        """Return the tightened space; raise (leaving self intact) if it empties.

        Answers arrive as non-strict inequalities: a "no" to p >= t is stored
        as p <= t, so optima stay attained.
        """
        if isinstance(c, BoundConstraint):
            key, idx = self._param_flat_id(c.param)
            if key[0] == "factor":
                j = key[1]
                lo = list(self.lvf_lo)
                hi = list(self.lvf_hi)
                lo[j] = lo[j].copy()
                hi[j] = hi[j].copy()
                if c.lo is not None:
                    lo[j][idx] = max(lo[j][idx], float(c.lo))
                if c.hi is not None:
                    hi[j][idx] = min(hi[j][idx], float(c.hi))
                new = self._updated(key, lvf_lo=tuple(lo), lvf_hi=tuple(hi))
            else:
                a_lo = self.anchor_lo.copy()
                a_hi = self.anchor_hi.copy()
                if c.lo is not None:
                    a_lo.reshape(-1)[idx] = max(a_lo.reshape(-1)[idx], float(c.lo))
                if c.hi is not None:
                    a_hi.reshape(-1)[idx] = min(a_hi.reshape(-1)[idx], float(c.hi))
                new = self._updated(key, anchor_lo=a_lo, anchor_hi=a_hi)
        elif isinstance(c, ComparisonConstraint):
            gkey, gid = self._param_flat_id(c.greater)
            lkey, lid = self._param_flat_id(c.lesser)
            if gkey != lkey:
                raise SchemaError("comparison constraints must stay within one block")
            if gid == lid:
                raise SchemaError("comparison needs two distinct parameters")
            key = gkey
            edge = (gid, lid)
            if key[0] == "factor":
                j = key[1]
                edges = list(self.lvf_edges)
                if edge not in edges[j]:
                    edges[j] = edges[j] + (edge,)
                new = self._updated(key, lvf_edges=tuple(edges))
            else:
                a_edges = self.anchor_edges
                if edge not in a_edges:
                    a_edges = a_edges + (edge,)
                new = self._updated(key, anchor_edges=a_edges)
        else:
            raise SchemaError(f"unsupported constraint {c!r}")
        try:
            new._closure(key)
        except InconsistentConstraintError:
            raise InconsistentConstraintError(
                f"assertion empties the utility polytope: {c}", constraint=c
            ) from None
        return new

    # -- queries over the geometry -------------------------------------------

    def bounding_box(self, key: BlockKey) -> HyperBox:
        tb = self._closure(key)
        return HyperBox(lo=tb.lo, hi=tb.hi)

    def factor_box(self, j: int) -> HyperBox:
        return self.bounding_box(("factor", j))

    def anchor_box(self) -> HyperBox:
        """Flat layout: parameter 2j is factor j's top anchor, 2j+1 its bottom."""
        return self.bounding_box(("anchors",))

    def weight_intervals(self) -> tuple[np.ndarray, np.ndarray]:
        """Feasible range of each factor's scale (top - bottom), from the tight
        anchor boxes; exact when no cross-factor anchor comparisons exist."""
        box = self.anchor_box()
        lo = np.maximum(0.0, box.lo[0::2] - box.hi[1::2])
        hi = box.hi[0::2] - box.lo[1::2]
        return lo, hi

    def known_relation(self, a: ParamRef, b: ParamRef) -> Optional[str]:
        """">=", "<=", or None when neither follows from what is known.

        Derivation uses the shortest-path closure, which covers transitive
        chains of comparisons, disjoint tight boxes, and mixtures of both.
        """
        akey, aid = self._param_flat_id(a)
        bkey, bid = self._param_flat_id(b)
        if akey != bkey:
            raise SchemaError("relation queries must stay within one block")
        dist = self._closure(akey).dist
        if dist[aid, bid] <= KNOWN_TOL:
            return ">="
        if dist[bid, aid] <= KNOWN_TOL:
            return "<="
        return None

    def maximize_linear(self, key: BlockKey, objective) -> tuple[float, np.ndarray]:
        """Exact max of a linear objective over one block; returns a vertex.

        Blocks without comparison constraints use the per-coordinate closed
        form; anything else goes through the internal simplex.
        """
        lo, hi, edges = self._block(key)
        return smalllp.maximize(objective, lo, hi, edges, bounds=self._closure(key))

    def feasible_point(self, key: BlockKey) -> np.ndarray:
        """The tight lower corner (always feasible after closure)."""
        return self._closure(key).lo.copy()

    def has_anchor_comparisons(self) -> bool:
        return len(self.anchor_edges) > 0

    def param_bounds(self, p: ParamRef) -> tuple[float, float]:
        key, idx = self._param_flat_id(p)
        tb = self._closure(key)
        return float(tb.lo[idx]), float(tb.hi[idx])
