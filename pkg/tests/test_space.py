"""Utility polytope: assertions, bounding boxes, relations, linear maxima."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst

from regretkit import smalllp
from regretkit.errors import InconsistentConstraintError, SchemaError
from regretkit.space import (
    BoundConstraint,
    ComparisonConstraint,
    ParamRef,
    UtilitySpace,
    constraint_from_json,
)

from conftest import make_structure, random_space
from oracles import box_by_scan


@pytest.fixture
def simple_space():
    """One factor over two binary attributes: 4 local parameters, 2 pinned."""
    st = make_structure([2, 2], [(0, 1)])
    return UtilitySpace.initial(st)


def _free_codes(space, j=0):
    st = space.structure
    return [c for c in range(st.factor_sizes[j])
            if c not in (st.local_top[j], st.local_bottom[j])]


class TestAssertions:
    def test_bound_yes_tightens_lower(self, simple_space):
        i = _free_codes(simple_space)[0]
        new = simple_space.assert_constraint(
            BoundConstraint(ParamRef("local", 0, i), lo=0.5)
        )
        box = new.factor_box(0)
        assert box.lo[i] == pytest.approx(0.5)
        assert box.hi[i] == pytest.approx(1.0)
        # original untouched
        assert simple_space.factor_box(0).lo[i] == pytest.approx(0.0)

    def test_disjoint_intervals_inconsistent(self, simple_space):
        a, b = _free_codes(simple_space)[:2]
        s = simple_space.assert_constraint(BoundConstraint(ParamRef("local", 0, a), hi=0.4))
        s = s.assert_constraint(BoundConstraint(ParamRef("local", 0, b), lo=0.6))
        with pytest.raises(InconsistentConstraintError) as exc:
            s.assert_constraint(
                ComparisonConstraint(ParamRef("local", 0, a), ParamRef("local", 0, b))
            )
        assert exc.value.constraint is not None

    def test_anchor_comparison_no_is_complement(self):
        st = make_structure([2, 2], [(0,), (1,)])
        space = UtilitySpace.initial(st)
        # "no" to top_0 >= bottom_1 stores the reversed inequality
        new = space.assert_constraint(
            ComparisonConstraint(ParamRef("anchor_bottom", 1), ParamRef("anchor_top", 0))
        )
        assert new.known_relation(
            ParamRef("anchor_bottom", 1), ParamRef("anchor_top", 0)
        ) == ">="

    def test_cross_factor_local_comparison_rejected(self, simple_space):
        st = make_structure([2, 2], [(0,), (1,)])
        space = UtilitySpace.initial(st)
        with pytest.raises(SchemaError, match="one block"):
            space.assert_constraint(
                ComparisonConstraint(ParamRef("local", 0, 0), ParamRef("local", 1, 0))
            )

    def test_constraint_json_round_trip(self):
        c = BoundConstraint(ParamRef("local", 2, 5), lo=0.25)
        assert constraint_from_json(c.to_json()) == c
        c2 = ComparisonConstraint(ParamRef("anchor_top", 1), ParamRef("anchor_bottom", 0))
        assert constraint_from_json(c2.to_json()) == c2


class TestBoundingBox:
    def test_box_only_unchanged(self):
        st = make_structure([2, 2], [(0, 1)])
        lo = [np.array([0.0, 0.1, 0.2, 0.0])]
        hi = [np.array([0.0, 0.8, 0.9, 1.0])]
        lo[0][st.local_top[0]], hi[0][st.local_top[0]] = 1.0, 1.0
        lo[0][st.local_bottom[0]], hi[0][st.local_bottom[0]] = 0.0, 0.0
        space = UtilitySpace.initial(st, lo, hi)
        box = space.factor_box(0)
        assert np.allclose(box.lo, lo[0]) and np.allclose(box.hi, hi[0])

    def test_comparison_forces_bound(self, simple_space):
        a, b = _free_codes(simple_space)[:2]
        s = simple_space.assert_constraint(BoundConstraint(ParamRef("local", 0, b), lo=0.5))
        s = s.assert_constraint(
            ComparisonConstraint(ParamRef("local", 0, a), ParamRef("local", 0, b))
        )
        box = s.factor_box(0)
        assert box.lo[a] == pytest.approx(0.5)

    def test_matches_propagation_scan(self):
        rng = np.random.default_rng(3)
        for trial in range(8):
            st = make_structure([2, 3], [(0, 1)])
            space = random_space(st, rng, comparisons=3)
            tb = space._closure(("factor", 0))
            scan_lo, scan_hi = box_by_scan(
                space.lvf_lo[0], space.lvf_hi[0], space.lvf_edges[0], resolution=1e-3
            )
            assert np.all(np.abs(tb.lo - scan_lo) <= 1e-3 + 1e-9)
            assert np.all(np.abs(tb.hi - scan_hi) <= 1e-3 + 1e-9)

    def test_monotone_tightening(self):
        rng = np.random.default_rng(11)
        st = make_structure([2, 3, 2], [(0, 1), (1, 2)])
        space = random_space(st, rng)
        for _ in range(25):
            j = int(rng.integers(0, 2))
            n = st.factor_sizes[j]
            before = [space.factor_box(k) for k in range(2)]
            before_anchor = space.anchor_box()
            try:
                if rng.random() < 0.5:
                    i = int(rng.integers(0, n))
                    lo, hi = space.param_bounds(ParamRef("local", j, i))
                    mid = (lo + hi) / 2
                    c = BoundConstraint(
                        ParamRef("local", j, i),
                        lo=mid if rng.random() < 0.5 else None,
                        hi=None if rng.random() < 0.5 else mid,
                    )
                    if c.lo is None and c.hi is None:
                        continue
                else:
                    i, k = rng.choice(n, size=2, replace=False)
                    c = ComparisonConstraint(
                        ParamRef("local", j, int(i)), ParamRef("local", j, int(k))
                    )
                space = space.assert_constraint(c)
            except InconsistentConstraintError:
                continue
            for k in range(2):
                after = space.factor_box(k)
                assert np.all(after.lo >= before[k].lo - 1e-12)
                assert np.all(after.hi <= before[k].hi + 1e-12)
            after_anchor = space.anchor_box()
            assert np.all(after_anchor.lo >= before_anchor.lo - 1e-12)
            assert np.all(after_anchor.hi <= before_anchor.hi + 1e-12)


class TestKnownRelation:
    def test_transitive(self):
        st = make_structure([2, 2, 2], [(0, 1, 2)])
        space = UtilitySpace.initial(st)
        codes = _free_codes(space)[:3]
        a, b, c = codes
        space = space.assert_constraint(
            ComparisonConstraint(ParamRef("local", 0, a), ParamRef("local", 0, b))
        )
        space = space.assert_constraint(
            ComparisonConstraint(ParamRef("local", 0, b), ParamRef("local", 0, c))
        )
        assert space.known_relation(ParamRef("local", 0, a), ParamRef("local", 0, c)) == ">="
        assert space.known_relation(ParamRef("local", 0, c), ParamRef("local", 0, a)) == "<="

    def test_bound_implied(self, simple_space):
        a, b = _free_codes(simple_space)[:2]
        s = simple_space.assert_constraint(BoundConstraint(ParamRef("local", 0, a), lo=0.7))
        s = s.assert_constraint(BoundConstraint(ParamRef("local", 0, b), hi=0.3))
        assert s.known_relation(ParamRef("local", 0, a), ParamRef("local", 0, b)) == ">="

    def test_fresh_unknown(self, simple_space):
        a, b = _free_codes(simple_space)[:2]
        assert simple_space.known_relation(
            ParamRef("local", 0, a), ParamRef("local", 0, b)
        ) is None


class TestMaximizeLinear:
    def test_box_closed_form(self):
        st = make_structure([2, 2], [(0, 1)])
        lo = [np.zeros(4)]
        hi = [np.ones(4)]
        a, b = [c for c in range(4) if c not in (st.local_top[0], st.local_bottom[0])]
        lo[0][a], hi[0][a] = 0.2, 0.6
        lo[0][b], hi[0][b] = 0.1, 0.5
        lo[0][st.local_top[0]] = hi[0][st.local_top[0]] = 1.0
        lo[0][st.local_bottom[0]] = hi[0][st.local_bottom[0]] = 0.0
        space = UtilitySpace.initial(st, lo, hi)
        obj = np.zeros(4)
        obj[a], obj[b] = 1.0, -1.0
        value, point = space.maximize_linear(("factor", 0), obj)
        assert value == pytest.approx(0.5)
        assert point[a] == pytest.approx(0.6) and point[b] == pytest.approx(0.1)

    def test_zero_objective(self, simple_space):
        value, point = simple_space.maximize_linear(("factor", 0), np.zeros(4))
        assert value == 0.0
        box = simple_space.factor_box(0)
        assert np.all(point >= box.lo - 1e-12) and np.all(point <= box.hi + 1e-12)

    def test_comparison_example(self, simple_space):
        a, b = _free_codes(simple_space)[:2]
        s = simple_space.assert_constraint(
            ComparisonConstraint(ParamRef("local", 0, a), ParamRef("local", 0, b))
        )
        obj = np.zeros(4)
        obj[a] = obj[b] = 1.0
        value, point = s.maximize_linear(("factor", 0), obj)
        assert value == pytest.approx(2.0)
        assert point[a] == pytest.approx(1.0) and point[b] == pytest.approx(1.0)

    def test_argmax_feasible_and_matches_vertices(self):
        rng = np.random.default_rng(9)
        st = make_structure([2, 3], [(0, 1)])
        for trial in range(10):
            space = random_space(st, rng, comparisons=3)
            obj = rng.normal(size=st.factor_sizes[0])
            value, point = space.maximize_linear(("factor", 0), obj)
            lo, hi, edges = space._block(("factor", 0))
            ref_val, _ = smalllp.maximize_by_vertices(obj, lo, hi, edges)
            assert value == pytest.approx(ref_val, abs=1e-9)
            tb = space._closure(("factor", 0))
            assert np.all(point >= tb.lo - 1e-9) and np.all(point <= tb.hi + 1e-9)
            for g, l in edges:
                assert point[g] >= point[l] - 1e-9
            # box soundness: every oracle vertex inside the bounding box
            for v in smalllp.enumerate_vertices(lo, hi, edges):
                assert np.all(v >= tb.lo - 1e-9) and np.all(v <= tb.hi + 1e-9)

    def test_anchor_block_with_comparisons(self):
        rng = np.random.default_rng(13)
        st = make_structure([2, 2], [(0,), (1,)])
        space = random_space(st, rng, anchor_comparisons=2)
        obj = rng.normal(size=4)
        value, point = space.maximize_linear(("anchors",), obj)
        lo, hi, edges = space._anchor_flat()
        ref_val, _ = smalllp.maximize_by_vertices(obj, lo, hi, edges)
        assert value == pytest.approx(ref_val, abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(hst.integers(min_value=0, max_value=10_000))
def test_eight_parameter_exactness(seed):
    """maximizeLinear == vertex enumeration on blocks with <= 8 parameters."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 9))
    a = rng.uniform(0, 1, n)
    b = rng.uniform(0, 1, n)
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    edges = []
    for _ in range(int(rng.integers(0, 4))):
        i, k = rng.choice(n, size=2, replace=False)
        edges.append((int(i), int(k)))
    try:
        bounds = smalllp.close_system(lo, hi, tuple(edges))
    except InconsistentConstraintError:
        return
    obj = rng.normal(size=n)
    v1, x1 = smalllp.maximize(obj, lo, hi, tuple(edges), bounds=bounds)
    v2, _ = smalllp.maximize_by_vertices(obj, lo, hi, tuple(edges))
    assert v1 == pytest.approx(v2, abs=1e-9)
    assert np.all(x1 >= bounds.lo - 1e-9) and np.all(x1 <= bounds.hi + 1e-9)
