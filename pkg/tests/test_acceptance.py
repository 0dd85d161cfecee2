"""Acceptance gate: one test and one PASS/FAIL line per criterion.

Run alone with ``pytest tests/test_acceptance.py -v -s`` to see the lines
inline; they are also summarised at the end of any pytest run.
"""

import math
import random
import time
from fractions import Fraction as F

import mpmath
import pytest

from acceptance_log import record
from lorentzchaos.chaos import (
    NonInjectiveError,
    corollary_conditions,
    finite_measure_equivalences,
    injective_li_yorke_criterion,
    irregular_vector_search,
    li_yorke_criterion,
    multiplication_li_yorke,
)
from lorentzchaos.expansivity import (
    expansive_invertible,
    positively_expansive,
    sphere_divergence_probe,
    uniformly_expansive_split,
    uniformly_positively_expansive,
)
from lorentzchaos.measure import (
    BILATERAL_SHIFT,
    BILATERAL_VALLEY,
    PAPER_EXAMPLE_24,
    UNILATERAL_SHIFT,
    check_injective,
    identity_map,
    make_builtin_space,
    make_finite_map,
    make_finite_space,
    measure_of,
    preimage_n,
)
from lorentzchaos.operators import CompositionOperator, MultiplicationOperator, normalize, orbit_trace
from lorentzchaos.oracle import (
    direct_orbit_levels,
    multiplication_sweep,
    norm_by_quadrature,
    rearrangement_by_sort,
)
from lorentzchaos.rearrangement import LorentzIndex, SimpleFunction, decreasing_rearrangement, lorentz_norm
from lorentzchaos.verdict import CONFIRMED, REFUTED

TOL = 1e-9


def _gate(key, title, checks, elapsed, limit):
    checks = list(checks) + [(f"runtime {elapsed:.2f}s < {limit}s", elapsed < limit)]
    failed = [name for name, ok in checks if not ok]
    record(key, title, not failed, "all checks ok" if not failed else "failed: " + "; ".join(failed))
    assert not failed, failed


def test_criterion_1_indicator_norm_identity():
    t0 = time.perf_counter()
    checks = []
    space = make_finite_space([("a", F(1, 3)), ("b", F(1, 6)), ("c", F(1, 2)), ("d", F(1))])
    sets = {F(1, 3): ["a"], F(1, 2): ["a", "b"], F(1): ["c", "b", "a"], F(2): ["a", "b", "c", "d"]}
    for muA, atoms in sets.items():
        assert measure_of(space, atoms) == muA
        chi = SimpleFunction.indicator(atoms)
        for p in (F(3, 2), F(2), F(3), F(4)):
            for q in (1, 2, 3):
                idx = LorentzIndex(p, q)
                n = lorentz_norm(space, chi, idx)
                with mpmath.workprec(200):
                    got = n.value ** q
                    want = mpmath.mpf(idx.p_conj.numerator) / idx.p_conj.denominator * \
                        mpmath.power(mpmath.mpf(muA.numerator) / muA.denominator, mpmath.mpf(q) / mpmath.mpf(p.numerator) * p.denominator)
                    checks.append((f"p={p} q={q} mu={muA}", abs(got - want) <= TOL))
            idx = LorentzIndex(p, "inf")
            n = lorentz_norm(space, chi, idx)
            with mpmath.workprec(200):
                want = mpmath.power(mpmath.mpf(muA.numerator) / muA.denominator, mpmath.mpf(p.denominator) / p.numerator)
                checks.append((f"p={p} q=inf mu={muA}", abs(n.value - want) <= TOL))
    _gate(1, "indicator-norm identity", checks, time.perf_counter() - t0, 1.0)


def test_criterion_2_example_24():
    t0 = time.perf_counter()
    space, tau = make_builtin_space(PAPER_EXAMPLE_24)
    checks = []
    for n in range(1, 16):
        m = measure_of(space, preimage_n(space, tau, [(0, 0)], n))
        checks.append((f"mu(tau^-{n}{{(0,0)}}) = 9^-{n}", m == F(1, 9**n)))
    left_tail = [[(k, 0)] for k in range(0, -8, -1)]
    v = li_yorke_criterion(space, tau, 20, left_tail)
    checks.append(("li_yorke REFUTED", v.status == REFUTED))
    checks.append(("sup ratio exactly 1/9", v.witness.get("uniform_bound") == F(1, 9)))
    checks.append(("attained at n = 1", v.witness.get("attained_by", {}).get("n") == 1))
    inj = check_injective(space, tau, space.window(64))
    coll = inj.witness.get("collision", {})
    a, b = coll.get("atoms", [None, None])
    checks.append(("check_injective REFUTED", inj.status == REFUTED))
    checks.append(("collision replays", a != b and tau.forward(a) == tau.forward(b) == coll.get("image")))
    checks.append(("collision is tau(-1,0) = tau(1,1) = (1,0)", {a, b} == {(-1, 0), (1, 1)} and coll["image"] == (1, 0)))
    conds = corollary_conditions(space, tau, [(0, 0)], 20)
    checks.append(("corollary (a) CONFIRMED", conds["a"].status == CONFIRMED))
    checks.append(("corollary (b) CONFIRMED", conds["b"].status == CONFIRMED))
    try:
        injective_li_yorke_criterion(space, tau, [(0, 0)], 20)
        refused = False
    except NonInjectiveError:
        refused = True
    checks.append(("injective corollary refuses non-injective tau", refused))
    _gate(2, "non-injective collision example", checks, time.perf_counter() - t0, 1.0)


def test_criterion_3_oracle_equivalence():
    t0 = time.perf_counter()
    rng = random.Random(20240603)
    rearr_ok = 0
    for _ in range(1000):
        k = rng.randint(1, 12)
        space = make_finite_space([(i, F(rng.randint(1, 30), rng.randint(1, 30))) for i in range(k)])
        g = SimpleFunction({i: F(rng.randint(0, 6), rng.randint(1, 3)) for i in range(k)})
        rearr_ok += decreasing_rearrangement(space, g) == rearrangement_by_sort(space, g)
    norm_ok, worst = 0, 0.0
    done = 0
    while done < 200:
        k = rng.randint(1, 12)
        space = make_finite_space([(i, F(rng.randint(1, 30), rng.randint(1, 30))) for i in range(k)])
        g = SimpleFunction({i: F(rng.randint(0, 20), rng.randint(1, 9)) for i in range(k)})
        if not g:
            continue
        idx = LorentzIndex(rng.choice([F(3, 2), F(2), F(5, 2), F(3), F(4)]), rng.choice([1, 2, 3]))
        a, o = lorentz_norm(space, g, idx), norm_by_quadrature(space, g, idx)
        budget = a.abs_error + o.abs_error
        norm_ok += abs(a.value - o.value) <= budget
        worst = max(worst, float(abs(a.value - o.value) / budget))
        done += 1
    checks = [
        (f"rearrangement agrees {rearr_ok}/1000", rearr_ok == 1000),
        (f"norm within summed abs_error {norm_ok}/200 (worst {worst:.2f} of budget)", norm_ok == 200),
    ]
    _gate(3, "oracle equivalence", checks, time.perf_counter() - t0, 30.0)


def test_criterion_4_expansivity_suite():
    t0 = time.perf_counter()
    checks = []
    B, bt = make_builtin_space(BILATERAL_SHIFT, F(1, 2))
    v = positively_expansive(B, bt, 20)
    checks.append(("bilateral positively_expansive CONFIRMED", v.status == CONFIRMED))
    checks.append(("exact per-step ratio 2", v.witness.get("trend_ratios") == [F(2)]))
    for a in B.window(16).atoms:
        seq = [measure_of(B, preimage_n(B, bt, [a], n)) for n in range(21)]
        if any(seq[n + 1] != 2 * seq[n] for n in range(20)):
            checks.append((f"ratio 2 at atom {a}", False))
    for p in (F(3, 2), F(2), F(3)):
        idx = LorentzIndex(p, 2)
        samples = [normalize(B, SimpleFunction.indicator([a]), idx) for a in B.window(8).atoms]
        rep = sphere_divergence_probe(CompositionOperator(B, bt), idx, samples, 10)
        expected = math.ceil(p)  # least n with 2^{n/p} >= 2
        checks.append((f"probe first passage p={p} is {expected}", set(rep.first_passage) == {expected}))
    U, ut = make_builtin_space(UNILATERAL_SHIFT, F(1, 2))
    v = positively_expansive(U, ut, 20)
    checks.append(("unilateral REFUTED", v.status == REFUTED))
    checks.append(("empty fiber witness at atom 1", v.witness.get("atom") == 1 and v.witness.get("empty_fiber_at") == 1
                   and preimage_n(U, ut, [1], 1) == frozenset()))
    V, vt = make_builtin_space(BILATERAL_VALLEY, 2)
    v, cert = uniformly_expansive_split(V, vt, 20)
    window = V.window(256).atoms
    checks.append(("valley split CONFIRMED", v.status == CONFIRMED))
    checks.append(("class_C = negative atoms", cert is not None and cert.class_C == frozenset(a for a in window if a < 0)))
    checks.append(("class_B = nonnegative atoms", cert is not None and cert.class_B == frozenset(a for a in window if a >= 0)))
    pow2 = tuple(F(2**n) for n in range(21))
    checks.append(("class_B uniform ratio 2^n", cert is not None and cert.bound_B == pow2))
    checks.append(("class_C uniform ratio 2^n", cert is not None and cert.bound_C == pow2))
    Id = identity_map(B)
    checks.append(("identity positively_expansive REFUTED", positively_expansive(B, Id, 20).status == REFUTED))
    checks.append(("identity uniformly REFUTED", uniformly_positively_expansive(B, Id, 20).status == REFUTED))
    checks.append(("identity invertible REFUTED", expansive_invertible(B, Id, 20).status == REFUTED))
    checks.append(("identity split REFUTED", uniformly_expansive_split(B, Id, 20)[0].status == REFUTED))
    _gate(4, "expansivity suite", checks, time.perf_counter() - t0, 5.0)


def test_criterion_5_equivalence_matrix():
    t0 = time.perf_counter()
    checks = []
    idx = LorentzIndex(2, 2)
    U, ut = make_builtin_space(UNILATERAL_SHIFT, F(1, 2))
    m = finite_measure_equivalences(U, ut, idx, 40, [[5]])
    for name in ("iii", "iv", "v", "vi"):
        checks.append((f"unilateral ({name}) CONFIRMED", m.conditions[name].status == CONFIRMED))
    ev = m.conditions["iii"].evidence[0]
    checks.append(("exact eventual zero from n = 5", ev["values"][5:] == [F(0)] * 36 and all(x > 0 for x in ev["values"][:5])))
    checks.append(("unilateral consistent", m.consistent))
    P = make_finite_space([(i, F(1, 4)) for i in range(4)])
    pt = make_finite_map(P, {i: (i + 1) % 4 for i in range(4)})
    m = finite_measure_equivalences(P, pt, idx, 40)
    checks.append(("permutation all REFUTED", all(v.status == REFUTED for v in m.conditions.values())))
    checks.append(("permutation consistent", m.consistent))
    _gate(5, "finite-measure consistency matrix", checks, time.perf_counter() - t0, 5.0)


# Pinned after an oracle run: spikes on m^2, coefficient 2^m times the normalising rational.
PINNED_SUPPORT = (4, 9, 16, 25, 36, 49)
PINNED_SWELL = 14091694.618468


def test_criterion_6_irregular_vector():
    t0 = time.perf_counter()
    U, ut = make_builtin_space(UNILATERAL_SHIFT, F(1, 2))
    idx = LorentzIndex(2, 2)
    res = irregular_vector_search(U, ut, idx, 64, 10**6)
    checks = [
        ("search SUCCESS", res.status == "SUCCESS"),
        (f"max/min ratio {mpmath.nstr(res.ratio, 6)} >= 1e6", res.ratio >= 10**6),
        (f"swell {mpmath.nstr(res.swell, 10)} >= 1e6", res.swell >= 10**6),
        ("support pinned", tuple(sorted(res.vector.support)) == PINNED_SUPPORT),
        ("swell pinned", abs(float(res.swell) - PINNED_SWELL) <= 1e-6 * PINNED_SWELL),
    ]
    for m, a in zip(range(2, 8), PINNED_SUPPORT):
        unit = normalize(U, SimpleFunction.indicator([a]), idx).vector
        checks.append((f"coefficient at {a} is 2^{m} x normaliser", res.vector[a] == 2**m * unit[a]))
    trace = orbit_trace(CompositionOperator(U, ut), res.vector, idx, 64)
    direct = direct_orbit_levels(U, ut, res.vector, 64, range(1, 65))
    checks.append(("trace level data matches direct iteration", [e.levels for e in trace.entries] == direct))
    _gate(6, "irregular-vector construction", checks, time.perf_counter() - t0, 10.0)


def test_criterion_7_multiplication_impossibility():
    t0 = time.perf_counter()
    rng = random.Random(7)
    refuted = irregular = 0
    for _ in range(200):
        k = rng.randint(1, 10)
        weights = [F(rng.randint(1, 20), rng.randint(1, 20)) for _ in range(k)]
        theta = [F(rng.randint(0, 40), 10) for _ in range(k)]
        space = make_finite_space(list(enumerate(weights)))
        op = MultiplicationOperator(space, dict(enumerate(theta)))
        refuted += multiplication_li_yorke(space, op).status == REFUTED
        irregular += multiplication_sweep(weights, theta, horizon=200)["irregular"]
    checks = [
        (f"verdict REFUTED {refuted}/200", refuted == 200),
        (f"irregular indicator vectors found: {irregular}", irregular == 0),
    ]
    _gate(7, "multiplication impossibility", checks, time.perf_counter() - t0, 30.0)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v", "-s"]))
