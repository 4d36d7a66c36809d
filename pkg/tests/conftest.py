import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from regretkit.errors import InconsistentConstraintError
from regretkit.model import GaiStructure
from regretkit.schema import Attribute, AttributeSchema, LocalCodec
from regretkit.search import FeasibilitySpec, iter_feasible
from regretkit.space import ComparisonConstraint, ParamRef, UtilitySpace


def make_structure(sizes, factors, reference=None, best=None):
    n = len(sizes)
    reference = tuple(reference or [0] * n)
    best = tuple(best or [s - 1 for s in sizes])
    attrs = tuple(
        Attribute(f"x{i}", tuple(f"l{k}" for k in range(sizes[i]))) for i in range(n)
    )
    schema = AttributeSchema(attrs, reference, best, reference)
    tops, bottoms = [], []
    for f in factors:
        codec = LocalCodec(tuple(f), tuple(sizes[a] for a in f))
        tops.append(codec.encode(best))
        bottoms.append(codec.encode(reference))
    return GaiStructure(schema, tuple(tuple(f) for f in factors), tuple(tops), tuple(bottoms))


def random_space(structure, rng, comparisons=0, anchor_comparisons=0,
                 anchor_top_range=(1, 50), anchor_bottom_range=(-50, -1)):
    """Random priors plus optional consistent comparison constraints."""
    lvf_lo, lvf_hi = [], []
    for n in structure.factor_sizes:
        a = rng.uniform(0, 1, n)
        b = rng.uniform(0, 1, n)
        lvf_lo.append(np.minimum(a, b))
        lvf_hi.append(np.maximum(a, b))
    m = structure.n_factors
    at = np.sort(rng.uniform(*anchor_top_range, (m, 2)), axis=1)
    ab = np.sort(rng.uniform(*anchor_bottom_range, (m, 2)), axis=1)
    anchor_lo = np.stack([at[:, 0], ab[:, 0]], axis=1)
    anchor_hi = np.stack([at[:, 1], ab[:, 1]], axis=1)
    space = UtilitySpace.initial(structure, lvf_lo, lvf_hi, anchor_lo, anchor_hi)
    for _ in range(comparisons):
        j = int(rng.integers(0, m))
        n = structure.factor_sizes[j]
        i, k = rng.choice(n, size=2, replace=False)
        try:
            space = space.assert_constraint(
                ComparisonConstraint(ParamRef("local", j, int(i)), ParamRef("local", j, int(k)))
            )
        except InconsistentConstraintError:
            pass
    for _ in range(anchor_comparisons):
        k, l = rng.integers(0, m), rng.integers(0, m)
        try:
            space = space.assert_constraint(
                ComparisonConstraint(
                    ParamRef("anchor_top", int(k)), ParamRef("anchor_bottom", int(l))
                )
            )
        except InconsistentConstraintError:
            pass
    return space


def random_nogoods(structure, rng, count):
    """Nogoods that keep the space non-empty (checked by enumeration)."""
    sizes = structure.schema.domain_sizes
    n = len(sizes)
    nogoods = []
    for _ in range(count):
        k = int(rng.integers(1, min(3, n) + 1))
        chosen = rng.choice(n, size=k, replace=False)
        g = tuple(sorted((int(a), int(rng.integers(0, sizes[a]))) for a in chosen))
        trial = FeasibilitySpec.constraint_space(nogoods + [g])
        if any(True for _ in iter_feasible(structure.schema, trial)):
            nogoods.append(g)
    return FeasibilitySpec.constraint_space(nogoods)


@pytest.fixture
def chain_structure():
    """4 attributes, 3 chain factors with single-attribute overlaps."""
    return make_structure([2, 3, 2, 2], [(0, 1), (1, 2), (2, 3)])


@pytest.fixture
def disjoint_structure():
    return make_structure([2, 2], [(0,), (1,)])
