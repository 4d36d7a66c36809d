"""Problem documents: the on-disk description of one decision problem.

A document bundles the attribute schema, the factor structure with its
declared local anchors, optional prior bounds on utility parameters, and the
feasible set (nogoods or an explicit catalog).  The JSON form is canonical:
sorted keys, compact separators, trailing newline; save(load(x)) is
byte-stable.  Validation collects every violation with a field path instead
of stopping at the first.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import SchemaError, ValidationError
from .model import GaiStructure
from .schema import Attribute, AttributeSchema, LocalCodec
from .search import FeasibilitySpec
from .space import UtilitySpace

FORMAT_NAME = "gai-workbench-problem"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class ProblemDocument:
    name: str
    structure: GaiStructure
    feasibility: FeasibilitySpec
    lvf_priors: Optional[tuple[tuple[np.ndarray, np.ndarray], ...]] = None  # per factor (lo, hi)
    anchor_priors: Optional[tuple[np.ndarray, np.ndarray]] = None  # (lo, hi), each (m, 2)
    metadata: dict = field(default_factory=dict)

    @property
    def schema(self) -> AttributeSchema:
        return self.structure.schema

    def initial_space(self) -> UtilitySpace:
        lvf_lo = lvf_hi = None
        if self.lvf_priors is not None:
            lvf_lo = [p[0] for p in self.lvf_priors]
            lvf_hi = [p[1] for p in self.lvf_priors]
        anchor_lo = anchor_hi = None
        if self.anchor_priors is not None:
            anchor_lo, anchor_hi = self.anchor_priors
        return UtilitySpace.initial(
            self.structure, lvf_lo, lvf_hi, anchor_lo, anchor_hi
        )

    def to_json_obj(self) -> dict:
        schema = self.schema
        factors = []
        for j, f in enumerate(self.structure.factors):
            codec = self.structure.codecs[j]
            top_levels = codec.decode(self.structure.local_top[j])
            bottom_levels = codec.decode(self.structure.local_bottom[j])
            factors.append(
                {
                    "attributes": [schema.attributes[a].name for a in f],
                    "local_top": [
                        schema.attributes[a].levels[v] for a, v in zip(f, top_levels)
                    ],
                    "local_bottom": [
                        schema.attributes[a].levels[v] for a, v in zip(f, bottom_levels)
                    ],
                }
            )
        obj = {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "name": self.name,
            "attributes": [
                {"name": a.name, "levels": list(a.levels)} for a in schema.attributes
            ],
            "reference": list(schema.outcome_names(schema.reference)),
            "global_best": list(schema.outcome_names(schema.global_best)),
            "global_worst": list(schema.outcome_names(schema.global_worst)),
            "factors": factors,
            "metadata": self.metadata,
        }
        priors: dict = {}
        if self.lvf_priors is not None:
            priors["lvf"] = [
                [[float(lo), float(hi)] for lo, hi in zip(p[0], p[1])]
                for p in self.lvf_priors
            ]
        if self.anchor_priors is not None:
            lo, hi = self.anchor_priors
            priors["anchor_top"] = [[float(a), float(b)] for a, b in zip(lo[:, 0], hi[:, 0])]
            priors["anchor_bottom"] = [[float(a), float(b)] for a, b in zip(lo[:, 1], hi[:, 1])]
        if priors:
            obj["priors"] = priors
        if self.feasibility.catalog is not None:
            obj["feasibility"] = {
                "catalog": [list(schema.outcome_names(it)) for it in self.feasibility.catalog]
            }
        else:
            obj["feasibility"] = {
                "nogoods": [
                    {
                        schema.attributes[a].name: schema.attributes[a].levels[v]
                        for a, v in g
                    }
                    for g in self.feasibility.nogoods
                ]
            }
        return obj

    def to_canonical_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True, separators=(",", ":")) + "\n"

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_canonical_json())


def _check_outcome_names(schema_attrs, levels, path, violations) -> Optional[tuple[int, ...]]:
    if not isinstance(levels, list) or len(levels) != len(schema_attrs):
        violations.append(f"{path}: expected {len(schema_attrs)} level names")
        return None
    out = []
    for i, (attr, name) in enumerate(zip(schema_attrs, levels)):
        if name not in attr.levels:
            violations.append(f"{path}[{i}]: {name!r} is not a level of attribute {attr.name!r}")
            return None
        out.append(attr.levels.index(name))
    return tuple(out)


def from_json_obj(obj: dict) -> ProblemDocument:
    """Parse and fully validate; raises ValidationError listing every problem."""
    violations: list[str] = []
    if not isinstance(obj, dict):
        raise ValidationError(["document root must be an object"])
    if obj.get("format") != FORMAT_NAME:
        violations.append(f"format: expected {FORMAT_NAME!r}")
    if "version" not in obj:
        violations.append("version: missing")
    name = obj.get("name")
    if not isinstance(name, str) or not name:
        violations.append("name: required non-empty string")
        name = "unnamed"

    attrs: list[Attribute] = []
    raw_attrs = obj.get("attributes")
    if not isinstance(raw_attrs, list) or not raw_attrs:
        violations.append("attributes: required non-empty list")
        raise ValidationError(violations)
    for i, ra in enumerate(raw_attrs):
        try:
            attrs.append(Attribute(str(ra["name"]), tuple(str(v) for v in ra["levels"])))
        except (KeyError, TypeError, SchemaError) as exc:
            violations.append(f"attributes[{i}]: {exc}")
    if violations:
        raise ValidationError(violations)

    reference = _check_outcome_names(attrs, obj.get("reference"), "reference", violations)
    best = _check_outcome_names(attrs, obj.get("global_best"), "global_best", violations)
    worst = _check_outcome_names(attrs, obj.get("global_worst"), "global_worst", violations)
    if violations:
        raise ValidationError(violations)
    schema = AttributeSchema(tuple(attrs), reference, best, worst)

    name_to_idx = {a.name: i for i, a in enumerate(attrs)}
    factors: list[tuple[int, ...]] = []
    tops: list[int] = []
    bottoms: list[int] = []
    raw_factors = obj.get("factors")
    if not isinstance(raw_factors, list) or not raw_factors:
        violations.append("factors: required non-empty list")
        raise ValidationError(violations)
    for j, rf in enumerate(raw_factors):
        fa = rf.get("attributes") if isinstance(rf, dict) else None
        if not isinstance(fa, list) or not fa:
            violations.append(f"factors[{j}].attributes: required non-empty list")
            continue
        unknown = [n for n in fa if n not in name_to_idx]
        if unknown:
            violations.append(f"factors[{j}].attributes: unknown attribute(s) {unknown}")
            continue
        idx = [name_to_idx[n] for n in fa]
        if len(set(idx)) != len(idx):
            violations.append(f"factors[{j}].attributes: duplicates")
            continue
        order = sorted(range(len(idx)), key=lambda t: idx[t])
        sorted_idx = tuple(idx[t] for t in order)
        codec = LocalCodec(sorted_idx, tuple(schema.domain_sizes[a] for a in sorted_idx))

        def _local_code(tag: str) -> Optional[int]:
            raw = rf.get(tag)
            if not isinstance(raw, list) or len(raw) != len(fa):
                violations.append(f"factors[{j}].{tag}: expected {len(fa)} level names")
                return None
            reordered = [raw[t] for t in order]
            levels = []
            for a, lname in zip(sorted_idx, reordered):
                if lname not in attrs[a].levels:
                    violations.append(
                        f"factors[{j}].{tag}: {lname!r} is not a level of {attrs[a].name!r}"
                    )
                    return None
                levels.append(attrs[a].levels.index(lname))
            code = 0
            for lvl, s in zip(levels, codec.sizes):
                code = code * s + lvl
            return code

        top = _local_code("local_top")
        bottom = _local_code("local_bottom")
        if top is None or bottom is None:
            continue
        if top == bottom:
            violations.append(f"factors[{j}]: local_top equals local_bottom")
            continue
        factors.append(sorted_idx)
        tops.append(top)
        bottoms.append(bottom)
    covered = set().union(*[set(f) for f in factors]) if factors else set()
    for a in range(len(attrs)):
        if a not in covered:
            violations.append(
                f"factors: attribute {attrs[a].name!r} is not covered by any factor"
            )
    if violations:
        raise ValidationError(violations)
    structure = GaiStructure(schema, tuple(factors), tuple(tops), tuple(bottoms))

    lvf_priors = None
    anchor_priors = None
    raw_priors = obj.get("priors")
    if raw_priors is not None:
        if not isinstance(raw_priors, dict):
            violations.append("priors: must be an object")
            raise ValidationError(violations)
        if "lvf" in raw_priors:
            raw_lvf = raw_priors["lvf"]
            if not isinstance(raw_lvf, list) or len(raw_lvf) != structure.n_factors:
                violations.append("priors.lvf: one interval list per factor required")
            else:
                pairs = []
                for j, rl in enumerate(raw_lvf):
                    n = structure.factor_sizes[j]
                    if not isinstance(rl, list) or len(rl) != n:
                        violations.append(f"priors.lvf[{j}]: expected {n} intervals")
                        pairs.append((np.zeros(n), np.ones(n)))
                        continue
                    lo = np.array([float(p[0]) for p in rl])
                    hi = np.array([float(p[1]) for p in rl])
                    if np.any(lo < 0) or np.any(hi > 1) or np.any(lo > hi):
                        violations.append(f"priors.lvf[{j}]: intervals must be within [0,1] with lo<=hi")
                    pairs.append((lo, hi))
                lvf_priors = tuple(pairs)
        if "anchor_top" in raw_priors or "anchor_bottom" in raw_priors:
            m = structure.n_factors
            lo = np.zeros((m, 2))
            hi = np.ones((m, 2))
            for col, tag in ((0, "anchor_top"), (1, "anchor_bottom")):
                raw_a = raw_priors.get(tag)
                if raw_a is None:
                    continue
                if not isinstance(raw_a, list) or len(raw_a) != m:
                    violations.append(f"priors.{tag}: one interval per factor required")
                    continue
                lo[:, col] = [float(p[0]) for p in raw_a]
                hi[:, col] = [float(p[1]) for p in raw_a]
                bad = np.nonzero(lo[:, col] > hi[:, col])[0]
                for j in bad:
                    violations.append(f"priors.{tag}[{j}]: lo > hi")
            anchor_priors = (lo, hi)

    raw_feas = obj.get("feasibility", {"nogoods": []})
    feas: Optional[FeasibilitySpec] = None
    if not isinstance(raw_feas, dict):
        violations.append("feasibility: must be an object")
    elif "catalog" in raw_feas:
        items = []
        for i, raw_it in enumerate(raw_feas["catalog"]):
            it = _check_outcome_names(attrs, raw_it, f"feasibility.catalog[{i}]", violations)
            if it is not None:
                items.append(it)
        if items and not violations:
            feas = FeasibilitySpec.explicit_catalog(items)
        elif not items:
            violations.append("feasibility.catalog: at least one item required")
    else:
        nogoods = []
        for i, raw_g in enumerate(raw_feas.get("nogoods", [])):
            if not isinstance(raw_g, dict) or not raw_g:
                violations.append(f"feasibility.nogoods[{i}]: non-empty object required")
                continue
            pairs = []
            ok = True
            for aname, lname in raw_g.items():
                if aname not in name_to_idx:
                    violations.append(f"feasibility.nogoods[{i}]: unknown attribute {aname!r}")
                    ok = False
                    break
                a = name_to_idx[aname]
                if lname not in attrs[a].levels:
                    violations.append(
                        f"feasibility.nogoods[{i}].{aname}: {lname!r} is not a level"
                    )
                    ok = False
                    break
                pairs.append((a, attrs[a].levels.index(lname)))
            if ok:
                nogoods.append(tuple(sorted(pairs)))
        if not violations:
            feas = FeasibilitySpec.constraint_space(nogoods)

    if violations:
        raise ValidationError(violations)
    metadata = obj.get("metadata") or {}
    return ProblemDocument(
        name=name,
        structure=structure,
        feasibility=feas,
        lvf_priors=lvf_priors,
        anchor_priors=anchor_priors,
        metadata=metadata,
    )


def loads_problem(text: str) -> ProblemDocument:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError([f"parse error: {exc}"]) from None
    return from_json_obj(obj)


def load_problem(path) -> ProblemDocument:
    with open(path, "r", encoding="utf-8") as fh:
        return loads_problem(fh.read())
