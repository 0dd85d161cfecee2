import random
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lorentzchaos.expansivity import (
    atom_class_table,
    expansive_invertible,
    positively_expansive,
    ratio_floor,
    sphere_divergence_probe,
    uniformly_expansive_split,
    uniformly_positively_expansive,
)
from lorentzchaos.measure import (
    BILATERAL_SHIFT,
    BILATERAL_VALLEY,
    PAPER_EXAMPLE_24,
    UNILATERAL_SHIFT,
    IntegerSpace,
    Transformation,
    identity_map,
    make_builtin_space,
    make_finite_map,
    make_finite_space,
    measure_of,
    preimage_n,
)
from lorentzchaos.operators import CompositionOperator, normalize
from lorentzchaos.rearrangement import LorentzIndex, SimpleFunction
from lorentzchaos.verdict import CONFIRMED, INCONCLUSIVE, REFUTED, PreconditionError, image_orbit, preimage_orbit

BI = make_builtin_space(BILATERAL_SHIFT, F(1, 2))
UNI = make_builtin_space(UNILATERAL_SHIFT, F(1, 2))
EX24 = make_builtin_space(PAPER_EXAMPLE_24)
VAL = make_builtin_space(BILATERAL_VALLEY, 2)
P22 = LorentzIndex(2, 2)


class TestPositive:
    def test_bilateral(self):
        v = positively_expansive(*BI, 20, window=32)
        assert v.status == CONFIRMED
        assert v.witness["trend_ratios"] == [2]

    def test_unilateral_refuted(self):
        v = positively_expansive(*UNI, 20, window=16)
        assert v.status == REFUTED
        a = v.witness["atom"]
        assert preimage_n(*UNI, [a], v.witness["empty_fiber_at"]) == set()

    def test_identity(self):
        s, _ = BI
        assert positively_expansive(s, identity_map(s), 10, window=8).status == REFUTED

    def test_valley_not_refuted(self):
        assert positively_expansive(*VAL, 12, window=16).status != REFUTED

    def test_horizon(self):
        with pytest.raises(PreconditionError):
            positively_expansive(*BI, 2)


class TestUniform:
    def test_bilateral(self):
        assert uniformly_positively_expansive(*BI, 20, window=32).status == CONFIRMED

    def test_unilateral(self):
        assert uniformly_positively_expansive(*UNI, 20, window=16).status == REFUTED

    def test_example24(self):
        assert uniformly_positively_expansive(*EX24, 12, window=20).status == REFUTED


class TestInvertible:
    def test_bilateral(self):
        assert expansive_invertible(*BI, 16, window=16).status == CONFIRMED

    def test_identity(self):
        s, _ = BI
        v = expansive_invertible(s, identity_map(s), 8, window=4)
        assert v.status == REFUTED
        assert {e["kind"] for e in v.evidence} == {"preimage_measures", "image_measures"}

    def test_not_invertible(self):
        with pytest.raises(PreconditionError):
            expansive_invertible(*EX24, 8)
        with pytest.raises(PreconditionError):
            uniformly_expansive_split(*UNI, 8)

    def test_permutation(self):
        s = make_finite_space([(i, 1) for i in range(3)])
        t = make_finite_map(s, {0: 1, 1: 2, 2: 0})
        assert expansive_invertible(s, t, 8).status == REFUTED


class TestSplit:
    def test_bilateral_all_fiber(self):
        v, cert = uniformly_expansive_split(*BI, 16, window=16)
        assert v.status == CONFIRMED
        assert not cert.class_B and len(cert.class_C) == 16
        assert cert.trend_C.ratio == 2

    def test_valley_split(self):
        v, cert = uniformly_expansive_split(*VAL, 16, window=15)
        assert cert is not None
        assert cert.class_B and cert.class_C
        replay_split(VAL, cert, 16)

    def test_identity(self):
        s, _ = BI
        v, cert = uniformly_expansive_split(s, identity_map(s), 8, window=4)
        assert v.status == REFUTED and cert is None


def replay_split(space_tau, cert, horizon):
    s, t = space_tau
    for a in cert.class_C:
        r = preimage_orbit(s, t, [a], horizon).ratios(s.weight(a))
        assert all(r[n] >= cert.bound_C[n] for n in range(horizon + 1))
    for a in cert.class_B:
        r = image_orbit(s, t, [a], horizon).ratios(s.weight(a))
        assert all(r[n] >= cert.bound_B[n] for n in range(horizon + 1))


class TestProbe:
    def test_bilateral_passes(self):
        s, t = BI
        samples = [normalize(s, SimpleFunction.indicator([k]), P22) for k in range(-3, 4)]
        rep = sphere_divergence_probe(CompositionOperator(s, t), P22, samples, 10)
        assert rep.all_pass and rep.max_passage == 2

    def test_identity_never(self):
        s, _ = BI
        samples = [normalize(s, SimpleFunction.indicator([0]), P22)]
        rep = sphere_divergence_probe(CompositionOperator(s, identity_map(s)), P22, samples, 10)
        assert rep.first_passage == (None,) and rep.to_dict()["max_first_passage"] == "NONE"

    def test_empty(self):
        with pytest.raises(PreconditionError):
            sphere_divergence_probe(CompositionOperator(*BI), P22, [], 5)

    def test_consistent_with_verdict(self):
        s, t = BI
        assert positively_expansive(s, t, 20, window=32).status == CONFIRMED
        rng = random.Random(11)
        samples = []
        for _ in range(50):
            vals = {rng.randint(-8, 8): F(rng.randint(1, 9), rng.randint(1, 9)) for _ in range(rng.randint(1, 5))}
            samples.append(normalize(s, SimpleFunction(vals), P22))
        rep = sphere_divergence_probe(CompositionOperator(s, t), P22, samples, 16)
        assert rep.all_pass


# -- properties --------------------------------------------------------------

@given(st.sampled_from([BI, UNI, EX24, VAL]), st.integers(2, 12), st.integers(4, 10))
def test_floor_dominated_by_atoms(space_tau, window, horizon):
    s, t = space_tau
    atoms = s.window(window).atoms
    floor, argmin, tables = ratio_floor(s, t, atoms, horizon)
    for a, orbit in tables:
        for n in range(horizon + 1):
            assert floor[n] <= orbit.measures[n] / s.weight(a)
    for n, a in enumerate(argmin):
        assert floor[n] == measure_of(s, preimage_n(s, t, [a], n)) / s.weight(a)


@given(st.integers(4, 12), st.integers(2, 10))
def test_atom_table_matches_orbits(horizon, window):
    s, t = VAL
    for rec in atom_class_table(s, t, horizon, window):
        assert rec.forward == preimage_orbit(s, t, [rec.atom], horizon).ratios(s.weight(rec.atom))
        assert rec.backward == image_orbit(s, t, [rec.atom], horizon).ratios(s.weight(rec.atom))


@pytest.mark.parametrize("r", [F(1, 2), F(1, 3), 3])
def test_mirror_symmetry(r):
    s, t = make_builtin_space(BILATERAL_SHIFT, r)
    mirrored = IntegerSpace(1 / F(r), False)
    tm = Transformation(t.inverse, lambda a: frozenset([t.forward(a)]), t.forward, name="mirror")
    v, cert = uniformly_expansive_split(s, t, 12, window=9)
    vm, cert_m = uniformly_expansive_split(mirrored, tm, 12, window=9)
    assert v.status == vm.status
    assert {-a for a in cert.class_B} == set(cert_m.class_B)
    assert {-a for a in cert.class_C} == set(cert_m.class_C)
