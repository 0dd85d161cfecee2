"""Li-Yorke chaos criteria for composition and multiplication operators.

Li-Yorke chaos of ``C_tau`` is detected through irregular vectors: a family
of sets whose fiber measures ``mu(tau^{-n}(A))`` dip to zero along a
subsequence while the ratios ``mu(tau^{-n}(A)) / mu(A)`` are unbounded over
the family.  Every verdict is horizon-qualified and carries the exact fiber
measures it was derived from.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import mpmath

from .measure import FINITE, MeasureSpace, Transformation, check_injective, measure_of, sort_atoms
from .operators import (
    IRREGULAR,
    SEMI_IRREGULAR,
    CompositionOperator,
    MultiplicationOperator,
    OrbitClass,
    classify_orbit,
    normalize,
    orbit_trace,
)
from .rearrangement import PREC, LorentzIndex, SimpleFunction, _mpf
from .verdict import (
    CONFIRMED,
    HIGH_RATIO,
    INCONCLUSIVE,
    LOW_RATIO,
    REFUTED,
    PreconditionError,
    SetOrbit,
    Verdict,
    growth_run,
    image_orbit,
    orbit_evidence,
    preimage_orbit,
)

DEFAULT_WINDOW = 256
MAX_WITNESS_SETS = 5


class NonInjectiveError(PreconditionError):
    def __init__(self, verdict: Verdict):
        self.verdict = verdict
        super().__init__(f"tau is not injective: {verdict.note}")


def _candidates(space: MeasureSpace, sets: Optional[Iterable], window: int, what: str) -> list:
    if sets is None:
        return [frozenset([a]) for a in space.window(window).atoms]
    out = [frozenset(s) for s in sets]
    if not out:
        raise PreconditionError(f"empty {what} list")
    if any(not s for s in out):
        raise PreconditionError(f"{what} sets must be nonempty")
    return out


def liminf_zero(orbit: SetOrbit, base: Fraction, low: Fraction = LOW_RATIO) -> Optional[bool]:
    """Certified ``liminf mu(S_n) = 0``: exact vanishing, or decay below ``low * base``."""
    if orbit.vanish_at is not None:
        return True
    decays = orbit.tends_to_zero()
    if decays is False:
        return False
    if decays and min(orbit.measures[1:]) <= low * base:
        return True
    return None


@dataclass
class CandidateRow:
    atoms: frozenset
    mass: Fraction
    orbit: SetOrbit
    condition_i: Optional[bool]
    peak: Fraction
    peak_at: int
    growth: object

    @property
    def ratios(self):
        return self.orbit.ratios(self.mass)

    def summary(self) -> dict:
        out = {
            "set": self.atoms,
            "measure": self.mass,
            "condition_i": self.condition_i,
            "sup_ratio": self.peak,
            "sup_at": self.peak_at,
        }
        out.update(self.orbit.summary())
        if self.growth is not None:
            out["growth"] = self.growth.to_dict()
        return out


def _row(space, tau, atoms, horizon, low) -> CandidateRow:
    mass = measure_of(space, atoms)
    orbit = preimage_orbit(space, tau, atoms, horizon)
    ratios = orbit.ratios(mass)
    peak_at = max(range(1, len(ratios)), key=lambda n: (ratios[n], -n))
    return CandidateRow(atoms, mass, orbit, liminf_zero(orbit, mass, low), ratios[peak_at], peak_at,
                        growth_run(ratios))


def li_yorke_criterion(space: MeasureSpace, tau: Transformation, horizon: int,
                       candidate_sets: Optional[Sequence] = None, window: int = DEFAULT_WINDOW,
                       low: Fraction = LOW_RATIO, high: Fraction = HIGH_RATIO) -> Verdict:
    """Two-condition Li-Yorke test for ``C_tau`` over a candidate family.

    CONFIRMED when some candidates have fiber measures that vanish (exactly,
    or by a decay trend below ``low``) and whose fiber ratios climb past
    ``high`` along a geometric growth run.  REFUTED when every candidate is
    certified and those satisfying the vanishing condition never expand
    (uniform ratio bound at most 1, which passes to unions by convexity).
    """
    if horizon < 4:
        raise PreconditionError("horizon must be at least 4")
    rows = [_row(space, tau, A, horizon, low) for A in _candidates(space, candidate_sets, window, "candidate")]

    family = [r for r in rows if r.condition_i and r.growth is not None and r.peak >= high]
    if family:
        shown = family[:MAX_WITNESS_SETS]
        witness = {
            "family": [r.atoms for r in shown],
            "family_size": len(family),
            "sequences": [
                {
                    "set": r.atoms,
                    "alpha": [n for n, x in enumerate(r.ratios) if n and x <= low][:10],
                    "sup_ratio": r.peak,
                    "sup_at": r.peak_at,
                }
                for r in shown
            ],
        }
        return Verdict(
            CONFIRMED,
            witness=witness,
            trend=shown[0].growth,
            evidence=[orbit_evidence("preimage_measures", r.atoms, r.orbit) for r in shown],
            note="fiber measures vanish along a subsequence while fiber ratios grow past the high threshold",
            horizon=horizon,
        )

    certified = all(r.condition_i is not None for r in rows)
    vanishing = [r for r in rows if r.condition_i]
    certified = certified and all(r.orbit.bounded() for r in vanishing)
    if certified:
        top = max(vanishing, key=lambda r: r.peak, default=None)
        bound = top.peak if top else Fraction(0)
        if bound <= 1:
            witness = {
                "uniform_bound": bound,
                "vanishing_family_size": len(vanishing),
                "candidates": len(rows),
            }
            evidence = []
            if top is not None:
                witness["attained_by"] = {"set": top.atoms, "n": top.peak_at}
                evidence = [orbit_evidence("preimage_measures", r.atoms, r.orbit) for r in vanishing[:MAX_WITNESS_SETS]]
                if top not in vanishing[:MAX_WITNESS_SETS]:
                    evidence.append(orbit_evidence("preimage_measures", top.atoms, top.orbit))
            else:
                witness["reason"] = "no candidate has vanishing fiber measures"
                evidence = [orbit_evidence("preimage_measures", r.atoms, r.orbit) for r in rows[:MAX_WITNESS_SETS]]
            return Verdict(
                REFUTED,
                witness=witness,
                trend=top.orbit.trend if top else None,
                evidence=evidence,
                note="sets with vanishing fibers never expand: sup of mu(tau^-n A)/mu(A) is bounded",
                horizon=horizon,
            )

    return Verdict(
        INCONCLUSIVE,
        witness={
            "candidates": len(rows),
            "uncertified": sum(r.condition_i is None for r in rows),
            "vanishing": len(vanishing),
            "max_ratio_among_vanishing": max((r.peak for r in vanishing), default=None),
        },
        horizon=horizon,
    )


def _signed_measures(pre: SetOrbit, img: SetOrbit) -> dict:
    """``n -> mu(tau^n(A))`` for ``-H <= n <= H`` (negative n are fibers)."""
    out = {n: m for n, m in enumerate(img.measures)}
    out.update({-n: m for n, m in enumerate(pre.measures) if n})
    return out


def corollary_conditions(space: MeasureSpace, tau: Transformation, atoms, horizon: int,
                         low: Fraction = LOW_RATIO, high: Fraction = HIGH_RATIO) -> dict:
    """Evaluate conditions (a) and (b) of the injective corollary without checking injectivity.

    (a) ``liminf mu(tau^{-n}(A)) = 0``;
    (b) ``sup mu(tau^n A) / mu(tau^m A)`` over ``n < m`` is infinite, with
        ``n`` ranging over ``[-H, H]`` and ``m`` over ``[0, H]``.
    """
    A = frozenset(atoms)
    if not A:
        raise PreconditionError("A must be nonempty")
    mass = measure_of(space, A)
    pre = preimage_orbit(space, tau, A, horizon)
    img = image_orbit(space, tau, A, horizon)
    ev_pre = orbit_evidence("preimage_measures", A, pre)
    ev_img = orbit_evidence("image_measures", A, img)

    a_flag = liminf_zero(pre, mass, low)
    status = {True: CONFIRMED, False: REFUTED, None: INCONCLUSIVE}[a_flag]
    cond_a = Verdict(
        status,
        witness={"set": A, "min_measure": min(pre.measures[1:]), **pre.summary()},
        trend=pre.trend,
        evidence=[ev_pre],
        horizon=horizon,
    )

    signed = _signed_measures(pre, img)
    best, best_pair, running_max, arg_running = Fraction(0), None, None, None
    for n in range(-horizon, horizon + 1):
        if n >= 0 and signed[n] > 0 and running_max is not None:
            r = running_max / signed[n]
            if r > best:
                best, best_pair = r, (arg_running, n)
        if running_max is None or signed[n] > running_max:
            running_max, arg_running = signed[n], n
    grows = (img.trend is not None and img.trend.ratio < 1) or (pre.trend is not None and pre.trend.ratio > 1)
    if best >= high and grows:
        b_status = CONFIRMED
    elif img.period is not None and (pre.period is not None or pre.vanish_at is not None):
        b_status = REFUTED
    else:
        b_status = INCONCLUSIVE
    cond_b = Verdict(
        b_status,
        witness={"set": A, "sup_ratio": best, "pair": best_pair, "images": img.summary(), "fibers": pre.summary()},
        trend=img.trend if img.trend is not None else pre.trend,
        evidence=[ev_img, ev_pre],
        horizon=horizon,
    )
    return {"a": cond_a, "b": cond_b}


def injective_li_yorke_criterion(space: MeasureSpace, tau: Transformation, atoms, horizon: int,
                                 window: int = DEFAULT_WINDOW, low: Fraction = LOW_RATIO,
                                 high: Fraction = HIGH_RATIO) -> Verdict:
    """Sufficient test for injective ``tau``: conditions (a) and (b) on one set.

    Raises :class:`NonInjectiveError` otherwise; without injectivity the two
    conditions do not imply chaos (the PAPER_EXAMPLE_24 space is the
    standard counterexample).
    """
    inj = check_injective(space, tau, space.window(window))
    if inj.status == REFUTED:
        raise NonInjectiveError(inj)
    conds = corollary_conditions(space, tau, atoms, horizon, low, high)
    both = all(v.status == CONFIRMED for v in conds.values())
    return Verdict(
        CONFIRMED if both else INCONCLUSIVE,
        witness={"set": frozenset(atoms), "conditions": {k: v.to_dict() for k, v in conds.items()}},
        trend=conds["b"].trend,
        evidence=conds["a"].evidence + conds["b"].evidence[:1],
        note="" if both else "conditions (a), (b) are only sufficient; failure does not refute chaos",
        horizon=horizon,
    )


CONDITIONS = ("ii", "iii", "iv", "v", "vi", "vii")


@dataclass
class EquivalenceMatrix:
    conditions: dict = field(default_factory=dict)

    @property
    def consistent(self) -> bool:
        statuses = {v.status for v in self.conditions.values()}
        return not (CONFIRMED in statuses and REFUTED in statuses)

    def to_dict(self):
        return {"consistent": self.consistent, "conditions": {k: v.to_dict() for k, v in self.conditions.items()}}


def _probe_flags(space, tau, idx, A, horizon, low) -> dict:
    mass = measure_of(space, A)
    pre = preimage_orbit(space, tau, A, horizon)
    img = image_orbit(space, tau, A, horizon)
    pre0 = liminf_zero(pre, mass, low)
    img0 = liminf_zero(img, mass, low)
    flags = {
        "iii": pre0,
        "iv": img0,
        "v": True if (pre0 and img0) else (False if (pre0 is False or img0 is False) else None),
    }
    if pre0:
        flags["vi"] = True if max(pre.measures[1:]) >= mass / 2 else None
    else:
        flags["vi"] = pre0
    trace = orbit_trace(CompositionOperator(space, tau), SimpleFunction.indicator(A), idx, horizon)
    cls = classify_orbit(trace)
    with mpmath.workprec(PREC):
        dips = cls.min_norm.value <= mpmath.mpf(low.numerator) / low.denominator * trace.entries[0].norm.value
    flags["ii"] = True if dips else (False if pre0 is False else None)
    flags["vii"] = True if cls.classification in (SEMI_IRREGULAR, IRREGULAR) else (False if pre0 is False else None)
    return {"flags": flags, "pre": pre, "img": img, "orbit_class": cls}


def finite_measure_equivalences(space: MeasureSpace, tau: Transformation, idx: LorentzIndex, horizon: int,
                                probe_sets: Optional[Sequence] = None, window: int = DEFAULT_WINDOW,
                                low: Fraction = LOW_RATIO, vector: Optional[SimpleFunction] = None
                                ) -> EquivalenceMatrix:
    """Evaluate the finite-measure equivalent conditions (ii)-(vii) at horizon.

    A condition is CONFIRMED by the first probe that exhibits it.  It is
    REFUTED only on finite-explicit spaces, where every atom is checked: each
    condition for a set needs the matching behaviour on each of its atoms.
    """
    if space.total_mass is None:
        raise PreconditionError("total mass must be finite")
    probes = _candidates(space, probe_sets, window, "probe")
    inj = check_injective(space, tau, space.window(window))
    if inj.status == REFUTED:
        raise NonInjectiveError(inj)

    results = [(A, _probe_flags(space, tau, idx, A, horizon, low)) for A in probes]
    exhaustive = None
    if space.kind == FINITE:
        atoms = list(space.atoms())
        exhaustive = {}
        for a in atoms:
            A = frozenset([a])
            mass = measure_of(space, A)
            exhaustive[a] = (
                liminf_zero(preimage_orbit(space, tau, A, horizon), mass, low),
                liminf_zero(image_orbit(space, tau, A, horizon), mass, low),
            )

    def refuted(name) -> bool:
        if exhaustive is None:
            return False
        if name == "iv":
            return all(img0 is False for _, img0 in exhaustive.values())
        if name == "v":
            return all(pre0 is False or img0 is False for pre0, img0 in exhaustive.values())
        return all(pre0 is False for pre0, _ in exhaustive.values())

    matrix = EquivalenceMatrix()
    for name in CONDITIONS:
        hit = next(((A, r) for A, r in results if r["flags"][name]), None)
        if hit is None and name == "ii" and vector is not None:
            tr = orbit_trace(CompositionOperator(space, tau), vector, idx, horizon)
            cls = classify_orbit(tr)
            if cls.classification in (SEMI_IRREGULAR, IRREGULAR):
                matrix.conditions[name] = Verdict(
                    CONFIRMED, witness={"vector": vector.to_dict(), "orbit_class": cls.to_dict()}, horizon=horizon)
                continue
        if hit is not None:
            A, r = hit
            witness = {"set": A, "fibers": r["pre"].summary(), "images": r["img"].summary()}
            if name in ("ii", "vii"):
                witness["orbit_class"] = r["orbit_class"].to_dict()
            evidence = [orbit_evidence("preimage_measures", A, r["pre"])]
            if name in ("iv", "v"):
                evidence.append(orbit_evidence("image_measures", A, r["img"]))
            matrix.conditions[name] = Verdict(CONFIRMED, witness=witness, evidence=evidence, horizon=horizon)
        elif refuted(name):
            matrix.conditions[name] = Verdict(
                REFUTED,
                witness={"exhaustive_atoms": len(exhaustive), "reason": "every atom has liminf > 0 (periodic)"},
                evidence=[orbit_evidence("preimage_measures", [a], preimage_orbit(space, tau, [a], horizon))
                          for a in sort_atoms(exhaustive)[:MAX_WITNESS_SETS]],
                horizon=horizon,
            )
        else:
            matrix.conditions[name] = Verdict(INCONCLUSIVE, horizon=horizon)
    return matrix


@dataclass
class SearchResult:
    vector: SimpleFunction
    orbit_class: OrbitClass
    ratio: object  # max/min orbit norm (mpf, may be inf)
    swell: object  # max / ||g||
    dip: object  # ||g|| / min
    status: str
    spikes: list

    def to_dict(self):
        return {
            "status": self.status,
            "vector": self.vector.to_dict(),
            "spikes": [{"set": s, "peak_at": n} for s, n in self.spikes],
            "ratio": mpmath.nstr(self.ratio, 12),
            "swell": mpmath.nstr(self.swell, 12),
            "dip": mpmath.nstr(self.dip, 12),
            "orbit_class": self.orbit_class.to_dict(),
        }


def irregular_vector_search(space: MeasureSpace, tau: Transformation, idx: LorentzIndex, horizon: int,
                            ratio_target, window: int = DEFAULT_WINDOW, growth: Fraction = Fraction(2),
                            low: Fraction = LOW_RATIO) -> SearchResult:
    """Greedy construction of an irregular vector from spike sets.

    Spike sets are candidate singletons whose fibers first swell and then
    vanish within the horizon.  Spikes are scheduled to peak near
    ``m^2 - 1`` for ``m = 2, 3, ...`` and get coefficient ``growth^m`` times a
    normalising factor.  Success means both the swell ``max / ||g||`` and the
    dip ``||g|| / min`` reach ``ratio_target`` (so ``max / min`` does too).
    """
    with mpmath.workprec(PREC):
        ratio_target = _mpf(ratio_target)
    if not ratio_target > 1:
        raise PreconditionError("ratio_target must exceed 1")
    if horizon < 8:
        raise PreconditionError("horizon must be at least 8")
    rows = [_row(space, tau, A, horizon, low) for A in _candidates(space, None, window, "candidate")]
    spiky = [r for r in rows if r.condition_i and r.peak > 1 and (r.orbit.vanish_at or horizon + 1) > r.peak_at]

    spikes, used, last_peak = [], set(), -1
    m = 2
    while m * m < horizon:
        target = m * m - 1
        pool = [r for r in spiky if r.atoms not in used and r.peak_at > last_peak]
        if pool:
            best = min(pool, key=lambda r: abs(r.peak_at - target))
            if best.peak_at <= target or not spikes or abs(best.peak_at - target) < target:
                spikes.append((best, m))
                used.add(best.atoms)
                last_peak = best.peak_at
        m += 1

    if spikes:
        vec = {}
        for r, m in spikes:
            unit = normalize(space, SimpleFunction.indicator(r.atoms), idx).vector
            for a, v in unit.values.items():
                vec[a] = vec.get(a, Fraction(0)) + growth**m * v
        g = SimpleFunction(vec)
    else:
        first = next(space.atoms())
        g = normalize(space, SimpleFunction.indicator([first]), idx).vector

    trace = orbit_trace(CompositionOperator(space, tau), g, idx, horizon)
    cls = classify_orbit(trace)
    with mpmath.workprec(PREC):
        g_norm = trace.entries[0].norm.value
        hi, lo = cls.max_norm.value, cls.min_norm.value
        swell = hi / g_norm
        dip = g_norm / lo if lo > 0 else mpmath.inf
        ratio = hi / lo if lo > 0 else mpmath.inf
    ok = bool(spikes) and swell >= ratio_target and dip >= ratio_target
    return SearchResult(g, cls, ratio, swell, dip, "SUCCESS" if ok else INCONCLUSIVE,
                        [(r.atoms, r.peak_at) for r, _ in spikes])


def multiplier_table(space: MeasureSpace, op: MultiplicationOperator, window: int = DEFAULT_WINDOW) -> list:
    atoms = list(space.atoms()) if space.kind == FINITE else list(space.window(window).atoms)
    for a in op.theta:
        if a not in atoms:
            atoms.append(a)
    rows = []
    for a in sort_atoms(atoms):
        t = op.at(a)
        rows.append({"kind": "theta_class", "atom": a, "theta": t, "class": "<1" if t < 1 else ("=1" if t == 1 else ">1")})
    return rows


def multiplication_li_yorke(space: MeasureSpace, op: MultiplicationOperator, window: int = DEFAULT_WINDOW) -> Verdict:
    """``M_theta`` is never Li-Yorke chaotic; returns the per-atom certificate.

    On ``{|theta| >= 1}`` the iterates never shrink, so a vector with
    ``liminf ||M^n g|| = 0`` vanishes there; on ``{|theta| < 1}`` every
    iterate has ``|M g| <= |g|`` pointwise, the norm is nonincreasing and
    tends to zero.  Hence no vector is semi-irregular.
    """
    table = multiplier_table(space, op, window)
    counts = {c: sum(r["class"] == c for r in table) for c in ("<1", "=1", ">1")}
    default_class = "<1" if op.default < 1 else ("=1" if op.default == 1 else ">1")
    return Verdict(
        REFUTED,
        witness={
            "classes": counts,
            "default_theta": op.default,
            "default_class": default_class,
            "argument": (
                "a vector with orbit-norm liminf 0 must vanish on {|theta| >= 1}; on {|theta| < 1} "
                "the orbit norm is nonincreasing and tends to 0, so its limsup is 0"
            ),
            "restructured_argument": True,
        },
        evidence=table,
        note="contraction is applied only on {|theta| < 1}",
    )
