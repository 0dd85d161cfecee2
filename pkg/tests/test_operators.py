from fractions import Fraction as F

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lorentzchaos.measure import (
    BILATERAL_SHIFT,
    PAPER_EXAMPLE_24,
    UNILATERAL_SHIFT,
    identity_map,
    make_builtin_space,
    make_finite_space,
    measure_of,
    preimage,
    preimage_n,
)
from lorentzchaos.operators import (
    IRREGULAR,
    REGULAR,
    SEMI_IRREGULAR,
    SPHERE_TOL,
    CompositionOperator,
    MultiplicationOperator,
    OrbitTrace,
    TraceEntry,
    classify_orbit,
    compose_apply,
    composition_bound,
    multiply_apply,
    normalize,
    orbit_trace,
)
from lorentzchaos.rearrangement import CertifiedReal, LorentzIndex, SimpleFunction, distribution_function, lorentz_norm

BI = make_builtin_space(BILATERAL_SHIFT, F(1, 2))
UNI = make_builtin_space(UNILATERAL_SHIFT, F(1, 2))
EX24 = make_builtin_space(PAPER_EXAMPLE_24)
P22 = LorentzIndex(2, 2)


def fake_trace(values):
    entries = tuple(TraceEntry(n, F(1), (), CertifiedReal(mpmath.mpf(v), mpmath.mpf(0))) for n, v in enumerate(values))
    return OrbitTrace("composition", P22, SimpleFunction({0: 1}), entries)


class TestApply:
    def test_indicator_transport_example(self):
        op = CompositionOperator(*EX24)
        assert compose_apply(op, SimpleFunction.indicator([(1, 0)]), 1) == SimpleFunction.indicator([(-1, 0), (1, 1)])

    def test_identity_iterate(self):
        g = SimpleFunction({0: 3, 1: 2})
        assert compose_apply(CompositionOperator(*BI), g, 0) == g

    def test_multiply(self):
        s = make_finite_space([("a", 1), ("b", 1)])
        op = MultiplicationOperator(s, {"a": F(1, 2), "b": 0})
        g = SimpleFunction({"a": 4, "b": 7})
        assert multiply_apply(op, g, 3) == SimpleFunction({"a": F(1, 2)})
        assert multiply_apply(MultiplicationOperator(s), g, 9) == g

    def test_multiplier_validation(self):
        s = make_finite_space([("a", 1)])
        with pytest.raises(ValueError):
            MultiplicationOperator(s, {"a": -1})
        with pytest.raises(ValueError):
            MultiplicationOperator(s, {"zz": 1})


class TestTrace:
    def test_bilateral_indicator(self):
        tr = orbit_trace(CompositionOperator(*BI), SimpleFunction.indicator([0]), P22, 10)
        assert len(tr.entries) == 11
        with mpmath.workprec(200):
            for e in tr.entries:
                assert e.measure == 2**e.n
                assert abs(e.norm.value**2 - 2 * 2**e.n) < mpmath.mpf(10) ** -40

    def test_unilateral_dies(self):
        tr = orbit_trace(CompositionOperator(*UNI), SimpleFunction.indicator([5]), P22, 8)
        assert [e.measure for e in tr.entries] == [F(1, 2**(5 - n)) for n in range(5)] + [0] * 4
        assert all(e.norm.value == 0 for e in tr.entries[5:])

    def test_identity_multiplier_constant(self):
        s = make_finite_space([("a", 1), ("b", 2)])
        tr = orbit_trace(MultiplicationOperator(s), SimpleFunction({"a": 1, "b": 3}), P22, 5)
        assert len({e.norm.value for e in tr.entries}) == 1

    def test_preconditions(self):
        op = CompositionOperator(*BI)
        with pytest.raises(ValueError):
            orbit_trace(op, SimpleFunction.indicator([0]), P22, 0)
        with pytest.raises(ValueError):
            orbit_trace(op, SimpleFunction(), P22, 3)


class TestClassify:
    def test_constant(self):
        assert classify_orbit(fake_trace([1] * 6)).classification == REGULAR

    def test_irregular(self):
        c = classify_orbit(fake_trace([1, 1e-8, 1e7, 1]), 1e-6, 1e6)
        assert c.classification == IRREGULAR and c.argmin == 1 and c.argmax == 2

    def test_unilateral_negative_control(self):
        tr = orbit_trace(CompositionOperator(*UNI), SimpleFunction.indicator([5]), P22, 10)
        assert classify_orbit(tr).classification in (REGULAR, SEMI_IRREGULAR)
        assert classify_orbit(tr).classification != IRREGULAR

    def test_low_below_high(self):
        with pytest.raises(ValueError):
            classify_orbit(fake_trace([1, 2]), 5, 1)


class TestBound:
    def test_bilateral(self):
        b = composition_bound(*BI, P22, BI[0].window(20))
        assert b.ratio == 2
        with mpmath.workprec(200):
            assert abs(b.bound.value - mpmath.sqrt(2)) < mpmath.mpf(10) ** -50

    def test_identity(self):
        s, _ = BI
        assert composition_bound(s, identity_map(s), P22, s.window(10)).ratio == 1

    def test_example24(self):
        s, t = EX24
        assert composition_bound(s, t, P22, s.window(64)).ratio >= 4


class TestNormalize:
    @pytest.mark.parametrize("p,q", [(2, 2), (3, 1), (F(3, 2), 3), (2, "inf")])
    def test_unit(self, p, q):
        idx = LorentzIndex(p, q)
        s = normalize(BI[0], SimpleFunction({0: 3, 1: 1, -4: 2}), idx)
        assert s.defect <= SPHERE_TOL

    def test_zero(self):
        with pytest.raises(ValueError):
            normalize(BI[0], SimpleFunction(), P22)


# -- properties --------------------------------------------------------------

small_sets = st.frozensets(st.integers(-10, 10), min_size=1, max_size=5)
functions = st.dictionaries(st.integers(-10, 10), st.fractions(F(1, 10), 10, max_denominator=10), min_size=1, max_size=6)
indices = st.sampled_from([LorentzIndex(p, q) for p in (F(3, 2), 2, 3) for q in (1, 2, 3)])


@given(small_sets, st.integers(0, 20))
def test_indicator_transport(A, n):
    op = CompositionOperator(*BI)
    assert compose_apply(op, SimpleFunction.indicator(A), n) == SimpleFunction.indicator(preimage_n(*BI, A, n))


@given(st.dictionaries(st.integers(-10, 10), st.integers(1, 4), min_size=1, max_size=6), st.integers(0, 5))
def test_distribution_transport(vals, lam):
    s, t = EX24
    g = SimpleFunction({(i, 0): v for i, v in vals.items()})
    h = compose_apply(CompositionOperator(s, t), g, 1)
    above = [a for a, v in g.values.items() if v > lam]
    assert distribution_function(s, h, lam) == measure_of(s, preimage(t, above))


@given(functions, indices)
def test_norm_bound(vals, idx):
    s, t = BI
    g = SimpleFunction(vals)
    b = composition_bound(s, t, idx, s.window(64))
    a, n = lorentz_norm(s, compose_apply(CompositionOperator(s, t), g, 1), idx), lorentz_norm(s, g, idx)
    with mpmath.workprec(200):
        assert a.value <= b.bound.value * n.value + 2 * (a.abs_error + b.bound.value * n.abs_error + n.value * b.bound.abs_error)


@given(st.lists(st.fractions(0, 1, max_denominator=9), min_size=3, max_size=3), functions.filter(lambda d: True), indices)
def test_multiplication_contraction(theta, vals, idx):
    s = make_finite_space([(i, F(abs(i) + 1, 3)) for i in range(-10, 11)])
    op = MultiplicationOperator(s, {i: theta[i % 3] for i in range(-10, 11)})
    g = SimpleFunction(vals)
    a, b = lorentz_norm(s, multiply_apply(op, g, 1), idx), lorentz_norm(s, g, idx)
    with mpmath.workprec(200):
        assert a.value <= b.value + 2 * (a.abs_error + b.abs_error)


@given(functions, st.integers(0, 12))
def test_semigroup_trace(vals, n):
    op = CompositionOperator(*BI)
    g = SimpleFunction(vals)
    tr = orbit_trace(op, g, P22, max(n, 1))
    h = g
    for _ in range(n):
        h = compose_apply(op, h, 1)
    levels = tuple(sorted(((v, measure_of(BI[0], atoms)) for v, atoms in h.levels().items()), reverse=True))
    assert tr.entries[n].levels == levels
