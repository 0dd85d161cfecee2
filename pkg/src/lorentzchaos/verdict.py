"""Horizon verdicts and the exact certificates they rest on.

Asymptotic conditions are decided from finitely many exact iterates.  A set
sequence ``S_0, S_1, ...`` generated by a deterministic step (fibers or
images) carries one of three certificates:

* vanishing: some ``S_k`` is empty, so every later set is empty;
* periodic: ``S_{k+l} == S_k``, so the sequence cycles forever;
* trend: the last ``>= MIN_TREND_RUN`` consecutive measure ratios agree.

The first two are proofs; the trend is horizon evidence only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

CONFIRMED = "CONFIRMED"
REFUTED = "REFUTED"
INCONCLUSIVE = "INCONCLUSIVE_AT_HORIZON"
STATUSES = (CONFIRMED, REFUTED, INCONCLUSIVE)

MIN_TREND_RUN = 5
LOW_RATIO = Fraction(1, 10**6)
HIGH_RATIO = Fraction(10**6)


class PreconditionError(ValueError):
    """An analyzer was called outside its contract."""


@dataclass(frozen=True)
class Trend:
    """``length`` consecutive ratios ``values[n+1] / values[n]`` all equal ``ratio``."""

    ratio: Fraction
    start: int
    length: int

    def to_dict(self):
        return {"ratio": str(self.ratio), "start": self.start, "length": self.length}


def _runs(values: Sequence[Fraction]):
    """Yield maximal runs ``(ratio, start, length)`` of equal consecutive ratios."""
    run = None
    for n in range(len(values) - 1):
        a, b = values[n], values[n + 1]
        if a == 0 or b == 0:
            if run:
                yield run
            run = None
            continue
        rho = b / a
        if run and run[0] == rho:
            run = (rho, run[1], run[2] + 1)
        else:
            if run:
                yield run
            run = (rho, n, 1)
    if run:
        yield run


def detect_trend(values: Sequence[Fraction], min_run: int = MIN_TREND_RUN) -> Optional[Trend]:
    """Geometric trend running up to the last value, if long enough."""
    if len(values) < 2 or values[-1] == 0:
        return None
    runs = list(_runs(values))
    if not runs:
        return None
    rho, start, length = runs[-1]
    if start + length != len(values) - 1 or length < min_run:
        return None
    return Trend(rho, start, length)


def growth_run(values: Sequence[Fraction], min_run: int = MIN_TREND_RUN) -> Optional[Trend]:
    """Longest run anywhere of agreeing ratios > 1 (first one on ties)."""
    best = None
    for rho, start, length in _runs(values):
        if rho > 1 and length >= min_run and (best is None or length > best.length):
            best = Trend(rho, start, length)
    return best


@dataclass(frozen=True)
class SetOrbit:
    """Exact measures of ``S_0..S_horizon`` plus the certificate found."""

    measures: tuple
    vanish_at: Optional[int] = None
    period: Optional[tuple] = None
    trend: Optional[Trend] = None

    @property
    def horizon(self) -> int:
        return len(self.measures) - 1

    @property
    def certificate(self) -> str:
        if self.vanish_at is not None:
            return "vanishing"
        if self.period is not None:
            return "periodic"
        if self.trend is not None:
            return "trend"
        return "none"

    def bounded(self) -> Optional[bool]:
        if self.vanish_at is not None or self.period is not None:
            return True
        if self.trend is not None:
            return self.trend.ratio <= 1
        return None

    def tends_to_zero(self) -> Optional[bool]:
        if self.vanish_at is not None:
            return True
        if self.period is not None:
            return False
        if self.trend is not None:
            return self.trend.ratio < 1
        return None

    def diverges(self) -> Optional[bool]:
        b = self.bounded()
        return None if b is None else not b

    def sup(self, start: int = 1) -> Fraction:
        return max(self.measures[start:])

    def ratios(self, base: Fraction) -> tuple:
        return tuple(m / base for m in self.measures)

    def summary(self) -> dict:
        out = {"certificate": self.certificate}
        if self.vanish_at is not None:
            out["vanish_at"] = self.vanish_at
        if self.period is not None:
            out["period"] = {"start": self.period[0], "length": self.period[1]}
        if self.trend is not None:
            out["trend"] = self.trend.to_dict()
        return out


def follow_sets(step: Callable[[frozenset], frozenset], measure: Callable[[frozenset], Fraction],
                start: frozenset, horizon: int) -> SetOrbit:
    """Iterate ``step`` from ``start`` for ``horizon`` steps with exact certificates."""
    if not start:
        return SetOrbit(tuple(Fraction(0) for _ in range(horizon + 1)), vanish_at=0)
    seen = {start: 0}
    measures = [measure(start)]
    current = start
    vanish_at = None
    period = None
    for n in range(1, horizon + 1):
        if vanish_at is not None:
            measures.append(Fraction(0))
            continue
        if period is not None:
            k, length = period
            measures.append(measures[k + (n - k) % length])
            continue
        current = step(current)
        measures.append(measure(current))
        if not current:
            vanish_at = n
            continue
        if current in seen:
            period = (seen[current], n - seen[current])
        else:
            seen[current] = n
    trend = None
    if vanish_at is None and period is None:
        trend = detect_trend(measures)
    return SetOrbit(tuple(measures), vanish_at, period, trend)


@dataclass
class Verdict:
    status: str
    witness: dict = field(default_factory=dict)
    trend: Optional[Trend] = None
    evidence: list = field(default_factory=list)
    note: str = ""
    horizon: Optional[int] = None

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")
        if self.status != INCONCLUSIVE and not self.witness:
            raise ValueError("decided verdicts must carry a witness")

    def to_dict(self) -> dict:
        out = {"status": self.status, "horizon": self.horizon, "witness": jsonable(self.witness)}
        if self.trend is not None:
            out["trend"] = self.trend.to_dict()
        if self.evidence:
            out["evidence"] = jsonable(self.evidence)
        if self.note:
            out["note"] = self.note
        return out


def jsonable(obj):
    """Fractions to strings, tuples (atom pairs, sets) to lists, recursively."""
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        from .measure import sort_atoms

        return [jsonable(v) for v in sort_atoms(obj)]
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    return obj


def preimage_orbit(space, tau, atoms, horizon: int) -> SetOrbit:
    """Certified measures of ``tau^{-n}(A)`` for ``n = 0..horizon``."""
    from .measure import measure_of, preimage

    return follow_sets(lambda s: preimage(tau, s), lambda s: measure_of(space, s), frozenset(atoms), horizon)


def image_orbit(space, tau, atoms, horizon: int) -> SetOrbit:
    """Certified measures of ``tau^n(A)`` for ``n = 0..horizon``."""
    from .measure import measure_of

    return follow_sets(
        lambda s: frozenset(tau.forward(a) for a in s),
        lambda s: measure_of(space, s),
        frozenset(atoms),
        horizon,
    )


def orbit_evidence(kind: str, atoms, orbit: SetOrbit) -> dict:
    """Replayable record: the exact measures of ``tau^{-n}(A)`` or ``tau^n(A)``."""
    return {"kind": kind, "set": frozenset(atoms), "values": list(orbit.measures), "certificate": orbit.summary()}
