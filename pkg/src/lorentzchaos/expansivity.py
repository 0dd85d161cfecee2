"""Positive, uniform and two-sided expansivity of composition operators.

Everything is evaluated atom by atom: for a finite set ``A`` the ratio
``mu(tau^{-n} A) / mu(A)`` is a weight-convex combination of the member atom
ratios, so atom-wise suprema and infima bound the set-wise ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import mpmath

from .measure import MeasureSpace, Transformation
from .operators import SPHERE_TOL, SphereSample, orbit_trace
from .rearrangement import PREC, LorentzIndex
from .verdict import (
    CONFIRMED,
    INCONCLUSIVE,
    REFUTED,
    PreconditionError,
    Verdict,
    detect_trend,
    image_orbit,
    orbit_evidence,
    preimage_orbit,
)

DEFAULT_WINDOW = 256


def _require_horizon(horizon: int):
    if horizon < 4:
        raise PreconditionError("horizon must be at least 4")


def _require_invertible(tau: Transformation):
    if not tau.invertible:
        raise PreconditionError("tau is not invertible")


def _recheck_horizon(horizon: int, window: int) -> int:
    # A decaying trend seen at the horizon may turn around later: in the
    # window, an atom's own index is the natural scale for that.
    return 2 * (horizon + window)


def _stays_bounded(orbit_fn, space, tau, a, horizon, window) -> bool:
    """Bounded at ``horizon`` with an exact certificate, or a decaying trend that survives a longer run."""
    orbit = orbit_fn(space, tau, [a], horizon)
    if orbit.vanish_at is not None or orbit.period is not None:
        return True
    if orbit.bounded():
        longer = orbit_fn(space, tau, [a], _recheck_horizon(horizon, window))
        return bool(longer.bounded())
    return False


def _window_atoms(space: MeasureSpace, window: int) -> tuple:
    return space.window(window).atoms


def positively_expansive(space: MeasureSpace, tau: Transformation, horizon: int,
                         window: int = DEFAULT_WINDOW) -> Verdict:
    """Is ``sup_n mu(tau^{-n}{a})`` infinite for every atom ``a``?"""
    _require_horizon(horizon)
    atoms = _window_atoms(space, window)
    orbits = [(a, preimage_orbit(space, tau, [a], horizon)) for a in atoms]
    for a, orbit in orbits:
        if orbit.bounded() and _stays_bounded(preimage_orbit, space, tau, a, horizon, window):
            witness = {"atom": a, "sup_measure": orbit.sup(0), **orbit.summary()}
            if orbit.vanish_at is not None:
                witness["empty_fiber_at"] = orbit.vanish_at
            return Verdict(REFUTED, witness=witness, trend=orbit.trend,
                           evidence=[orbit_evidence("preimage_measures", [a], orbit)],
                           note="fiber measures of this atom stay bounded", horizon=horizon)
    if all(o.diverges() for _, o in orbits):
        ratios = sorted({o.trend.ratio for _, o in orbits})
        return Verdict(CONFIRMED,
                       witness={"atoms": len(orbits), "trend_ratios": ratios},
                       trend=orbits[0][1].trend,
                       evidence=[orbit_evidence("preimage_measures", [a], o) for a, o in orbits[:5]],
                       horizon=horizon)
    undecided = [a for a, o in orbits if not o.diverges()]
    return Verdict(INCONCLUSIVE, witness={"undecided_atoms": undecided[:10]}, horizon=horizon)


def ratio_floor(space: MeasureSpace, tau: Transformation, atoms: Sequence, horizon: int,
                direction: str = "preimage") -> tuple:
    """``r_n = min_a mu(tau^{-n}{a}) / mu({a})`` (or images) with the minimising atom per n."""
    fn = preimage_orbit if direction == "preimage" else image_orbit
    tables = [(a, fn(space, tau, [a], horizon)) for a in atoms]
    floor, argmin = [], []
    for n in range(horizon + 1):
        best = min(tables, key=lambda t: t[1].measures[n] / space.weight(t[0]))
        floor.append(best[1].measures[n] / space.weight(best[0]))
        argmin.append(best[0])
    return floor, argmin, tables


def uniformly_positively_expansive(space: MeasureSpace, tau: Transformation, horizon: int,
                                   window: int = DEFAULT_WINDOW) -> Verdict:
    """Does ``inf_a mu(tau^{-n}{a}) / mu({a})`` tend to infinity?"""
    _require_horizon(horizon)
    atoms = _window_atoms(space, window)
    floor, argmin, tables = ratio_floor(space, tau, atoms, horizon)
    trend = detect_trend(floor)
    witness = {"floor": floor, "argmin": argmin}
    for a, orbit in tables:
        if orbit.vanish_at is not None or orbit.period is not None:
            return Verdict(REFUTED, witness={**witness, "atom": a, **orbit.summary()},
                           evidence=[orbit_evidence("preimage_measures", [a], orbit)],
                           note="an atom has exactly bounded fiber measures", horizon=horizon)
    if (trend is not None and trend.ratio <= 1) or all(floor[n + 1] <= floor[n] for n in range(horizon)):
        a = argmin[-1]
        orbit = dict(tables)[a]
        return Verdict(REFUTED, witness={**witness, "atom": a}, trend=trend,
                       evidence=[orbit_evidence("preimage_measures", [a], orbit)],
                       note="the window-wide ratio floor does not grow", horizon=horizon)
    if trend is not None and trend.ratio > 1:
        half, _, _ = ratio_floor(space, tau, atoms[: max(1, len(atoms) // 2)], horizon)
        if half == floor:
            return Verdict(CONFIRMED, witness=witness, trend=trend, horizon=horizon,
                           evidence=[orbit_evidence("preimage_measures", [a], o) for a, o in tables[:5]])
    return Verdict(INCONCLUSIVE, witness=witness, trend=trend, horizon=horizon)


def expansive_invertible(space: MeasureSpace, tau: Transformation, horizon: int,
                         window: int = DEFAULT_WINDOW) -> Verdict:
    """Two-sided test: ``sup`` over ``n`` in ``[-H, H]`` of ``mu(tau^{-n}{a})``."""
    _require_invertible(tau)
    _require_horizon(horizon)
    atoms = _window_atoms(space, window)
    undecided = []
    for a in atoms:
        pre = preimage_orbit(space, tau, [a], horizon)
        img = image_orbit(space, tau, [a], horizon)
        if pre.diverges() or img.diverges():
            continue
        if (pre.bounded() and img.bounded()
                and _stays_bounded(preimage_orbit, space, tau, a, horizon, window)
                and _stays_bounded(image_orbit, space, tau, a, horizon, window)):
            return Verdict(REFUTED,
                           witness={"atom": a, "fibers": pre.summary(), "images": img.summary()},
                           evidence=[orbit_evidence("preimage_measures", [a], pre),
                                     orbit_evidence("image_measures", [a], img)],
                           note="this atom is bounded in both time directions", horizon=horizon)
        undecided.append(a)
    if not undecided:
        return Verdict(CONFIRMED, witness={"atoms": len(atoms)}, horizon=horizon)
    return Verdict(INCONCLUSIVE, witness={"undecided_atoms": undecided[:10]}, horizon=horizon)


@dataclass(frozen=True)
class AtomRecord:
    atom: object
    forward: tuple  # mu(tau^{-n}{a}) / mu(a), n = 0..H
    backward: tuple  # mu(tau^{n}{a}) / mu(a)
    rho_forward: Optional[Fraction]
    rho_backward: Optional[Fraction]

    def to_dict(self):
        from .verdict import jsonable

        return jsonable({"atom": self.atom, "forward": self.forward, "backward": self.backward,
                         "rho_forward": self.rho_forward, "rho_backward": self.rho_backward})


def atom_class_table(space: MeasureSpace, tau: Transformation, horizon: int,
                     window: int = DEFAULT_WINDOW) -> list:
    out = []
    for a in _window_atoms(space, window):
        w = space.weight(a)
        pre = preimage_orbit(space, tau, [a], horizon)
        img = image_orbit(space, tau, [a], horizon) if tau.invertible else None
        out.append(AtomRecord(
            a,
            pre.ratios(w),
            img.ratios(w) if img else (),
            pre.trend.ratio if pre.trend else None,
            img.trend.ratio if img and img.trend else None,
        ))
    return out


def _grows(rho) -> bool:
    return rho is not None and rho > 1


@dataclass(frozen=True)
class SplitCertificate:
    class_B: frozenset  # image ratios diverge uniformly
    class_C: frozenset  # fiber ratios diverge uniformly
    bound_B: tuple
    bound_C: tuple
    trend_B: object
    trend_C: object

    def to_dict(self):
        from .verdict import jsonable

        return jsonable({
            "class_B": self.class_B,
            "class_C": self.class_C,
            "bound_B": self.bound_B,
            "bound_C": self.bound_C,
            "trend_B": self.trend_B,
            "trend_C": self.trend_C,
        })


def _class_floor(table, pick) -> tuple:
    if not table:
        return ()
    return tuple(min(pick(r)[n] for r in table) for n in range(len(pick(table[0]))))


def uniformly_expansive_split(space: MeasureSpace, tau: Transformation, horizon: int,
                              window: int = DEFAULT_WINDOW):
    """Split window atoms into image-divergent (B) and fiber-divergent (C) classes.

    Returns ``(verdict, certificate)``; the certificate is ``None`` unless a
    split was found.  An atom goes to C when its fibers grow and outpace its
    images at the horizon, otherwise to B when its images grow (ties to B).
    """
    _require_invertible(tau)
    _require_horizon(horizon)
    table = atom_class_table(space, tau, horizon, window)
    B, C, neither = [], [], []
    for r in table:
        f, b = _grows(r.rho_forward), _grows(r.rho_backward)
        if f and (not b or r.forward[-1] > r.backward[-1]):
            C.append(r)
        elif b:
            B.append(r)
        else:
            neither.append(r)
    if neither:
        for r in neither:
            if (_stays_bounded(preimage_orbit, space, tau, r.atom, horizon, window)
                    and _stays_bounded(image_orbit, space, tau, r.atom, horizon, window)):
                return Verdict(REFUTED,
                               witness={"atom": r.atom, "forward": r.forward, "backward": r.backward},
                               evidence=[
                                   orbit_evidence("preimage_measures", [r.atom],
                                                  preimage_orbit(space, tau, [r.atom], horizon)),
                                   orbit_evidence("image_measures", [r.atom],
                                                  image_orbit(space, tau, [r.atom], horizon)),
                               ],
                               note="this atom diverges in neither direction", horizon=horizon), None
        return Verdict(INCONCLUSIVE, witness={"unclassified": [r.atom for r in neither][:10]},
                       horizon=horizon), None
    bound_B = _class_floor(B, lambda r: r.backward)
    bound_C = _class_floor(C, lambda r: r.forward)
    trend_B = detect_trend(bound_B) if B else None
    trend_C = detect_trend(bound_C) if C else None
    cert = SplitCertificate(frozenset(r.atom for r in B), frozenset(r.atom for r in C),
                            bound_B, bound_C, trend_B, trend_C)
    ok = all(t is not None and t.ratio > 1 for t, cls in ((trend_B, B), (trend_C, C)) if cls)
    if ok:
        return Verdict(CONFIRMED, witness={"split": cert.to_dict()}, trend=trend_C or trend_B,
                       horizon=horizon), cert
    return Verdict(INCONCLUSIVE, witness={"split": cert.to_dict()}, horizon=horizon), cert


@dataclass(frozen=True)
class ProbeReport:
    threshold: Fraction
    horizon: int
    first_passage: tuple  # per sample: n or None

    @property
    def min_passage(self):
        hits = [n for n in self.first_passage if n is not None]
        return min(hits) if hits else None

    @property
    def max_passage(self):
        if any(n is None for n in self.first_passage):
            return None
        return max(self.first_passage) if self.first_passage else None

    @property
    def all_pass(self) -> bool:
        return all(n is not None for n in self.first_passage)

    def to_dict(self):
        return {
            "threshold": str(self.threshold),
            "horizon": self.horizon,
            "first_passage": ["NONE" if n is None else n for n in self.first_passage],
            "min_first_passage": self.min_passage,
            "max_first_passage": "NONE" if self.max_passage is None else self.max_passage,
        }


def sphere_divergence_probe(op, idx: LorentzIndex, samples: Sequence[SphereSample], horizon: int,
                            threshold=2) -> ProbeReport:
    """First ``n`` with ``||T^n x|| >= threshold`` for unit-norm samples.

    The comparison uses ``||T^n x|| / ||x||`` and accepts it when the upper
    end of its certified interval reaches the threshold.
    """
    if not samples:
        raise PreconditionError("no samples")
    threshold = Fraction(threshold)
    passages = []
    for s in samples:
        if s.defect > SPHERE_TOL:
            raise PreconditionError(f"sample is not normalized (norm {mpmath.nstr(s.norm.value, 12)})")
        trace = orbit_trace(op, s.vector, idx, horizon)
        with mpmath.workprec(PREC):
            base = trace.entries[0].norm
            hit = None
            for e in trace.entries:
                ratio = e.norm.value / base.value
                err = (e.norm.abs_error + ratio * base.abs_error) / base.value + abs(ratio) * mpmath.ldexp(1, 16 - PREC)
                if ratio + err >= mpmath.mpf(threshold.numerator) / threshold.denominator:
                    hit = e.n
                    break
        passages.append(hit)
    return ProbeReport(threshold, horizon, tuple(passages))
