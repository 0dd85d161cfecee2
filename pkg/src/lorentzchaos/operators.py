"""Composition and multiplication operators acting on simple functions."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

import mpmath

from .measure import (
    AtomId,
    MeasureSpace,
    SpaceWindow,
    Transformation,
    as_fraction,
    measure_of,
    preimage,
)
from .rearrangement import (
    PREC,
    CertifiedReal,
    LorentzIndex,
    SimpleFunction,
    StepFunction,
    lorentz_norm,
    step_norm,
    _mpf,
)

REGULAR = "REGULAR"
SEMI_IRREGULAR = "SEMI_IRREGULAR_AT_HORIZON"
IRREGULAR = "IRREGULAR_AT_HORIZON"

LOW_FACTOR = mpmath.mpf(10) ** -6
HIGH_FACTOR = mpmath.mpf(10) ** 6


@dataclass(frozen=True)
class CompositionOperator:
    space: MeasureSpace
    tau: Transformation

    kind = "composition"


@dataclass(frozen=True)
class MultiplicationOperator:
    """``g -> theta * g`` with ``|theta|`` listed per atom and ``default`` elsewhere."""

    space: MeasureSpace
    theta: dict = field(default_factory=dict)
    default: Fraction = Fraction(1)

    kind = "multiplication"

    def __post_init__(self):
        theta = {a: as_fraction(v) for a, v in dict(self.theta).items()}
        default = as_fraction(self.default)
        if default < 0 or any(v < 0 for v in theta.values()):
            raise ValueError("multiplier moduli must be nonnegative")
        for a in theta:
            if a not in self.space:
                raise ValueError(f"atom {a!r} not in space")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "default", default)

    def __hash__(self):
        return id(self)

    def at(self, atom: AtomId) -> Fraction:
        return self.theta.get(atom, self.default)


Operator = Union[CompositionOperator, MultiplicationOperator]


def _from_levels(levels: dict) -> SimpleFunction:
    return SimpleFunction({a: v for v, atoms in levels.items() for a in atoms})


def _step_levels(tau: Transformation, levels: dict) -> dict:
    out = {}
    for v, atoms in levels.items():
        pre = preimage(tau, atoms)
        if pre:
            out[v] = pre
    return out


def compose_apply(op: CompositionOperator, g: SimpleFunction, n: int) -> SimpleFunction:
    """``g o tau^n``, computed level set by level set."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    levels = g.levels()
    for a in g.support:
        if a not in op.space:
            raise ValueError(f"atom {a!r} not in space")
    for _ in range(n):
        if not levels:
            break
        levels = _step_levels(op.tau, levels)
    return _from_levels(levels)


def multiply_apply(op: MultiplicationOperator, g: SimpleFunction, n: int) -> SimpleFunction:
    if n < 0:
        raise ValueError("n must be nonnegative")
    return SimpleFunction({a: op.at(a) ** n * v for a, v in g.values.items()})


@dataclass(frozen=True)
class TraceEntry:
    n: int
    measure: Fraction  # mu(support of the n-th iterate)
    levels: tuple  # ((value, mu(level set)), ...) by decreasing value
    norm: CertifiedReal


@dataclass(frozen=True)
class OrbitTrace:
    operator: str
    index: LorentzIndex
    vector: SimpleFunction
    entries: tuple

    @property
    def horizon(self) -> int:
        return len(self.entries) - 1

    def norms(self) -> list:
        return [e.norm for e in self.entries]

    def measures(self) -> list:
        return [e.measure for e in self.entries]


def _entry(n: int, space: MeasureSpace, levels: dict, idx: LorentzIndex) -> TraceEntry:
    data = [(v, measure_of(space, atoms)) for v, atoms in levels.items() if atoms]
    data.sort(reverse=True)
    ends, acc = [], Fraction(0)
    for _, m in data:
        acc += m
        ends.append(acc)
    rearr = StepFunction(tuple(ends), tuple(v for v, _ in data))
    return TraceEntry(n, acc, tuple(data), step_norm(rearr, idx))


def orbit_trace(op: Operator, g: SimpleFunction, idx: LorentzIndex, horizon: int) -> OrbitTrace:
    """Norms and level-set measures of ``T^n g`` for ``n = 0..horizon``."""
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    if not g:
        raise ValueError("orbit of the zero vector requested")
    space = op.space
    entries = []
    if isinstance(op, CompositionOperator):
        levels = g.levels()
        for n in range(horizon + 1):
            if n:
                levels = _step_levels(op.tau, levels)
            entries.append(_entry(n, space, levels, idx))
    else:
        for n in range(horizon + 1):
            entries.append(_entry(n, space, multiply_apply(op, g, n).levels(), idx))
    return OrbitTrace(op.kind, idx, g, tuple(entries))


@dataclass(frozen=True)
class OrbitClass:
    classification: str
    min_norm: CertifiedReal
    max_norm: CertifiedReal
    argmin: int
    argmax: int

    def to_dict(self):
        return {
            "classification": self.classification,
            "min_norm": self.min_norm.to_dict(),
            "max_norm": self.max_norm.to_dict(),
            "argmin": self.argmin,
            "argmax": self.argmax,
        }


def classify_orbit(trace: OrbitTrace, low=None, high=None) -> OrbitClass:
    """Horizon-qualified irregular / semi-irregular classification.

    Defaults are ``1e-6 * ||g||`` and ``1e6 * ||g||``.  The limsup is read off
    the maximum over ``n = 0..horizon``; no limit is ever claimed.
    """
    norms = trace.norms()
    g_norm = norms[0].value
    with mpmath.workprec(PREC):
        low = LOW_FACTOR * g_norm if low is None else mpmath.mpf(low)
        high = HIGH_FACTOR * g_norm if high is None else mpmath.mpf(high)
        if not low < high:
            raise ValueError("need low < high")
        values = [x.value for x in norms]
        argmin = min(range(len(values)), key=lambda n: (values[n], n))
        argmax = max(range(len(values)), key=lambda n: (values[n], -n))
        lo, hi = values[argmin], values[argmax]
        if lo <= low and hi >= high:
            cls = IRREGULAR
        elif lo <= low and hi >= g_norm / 2:
            cls = SEMI_IRREGULAR
        else:
            cls = REGULAR
    return OrbitClass(cls, norms[argmin], norms[argmax], argmin, argmax)


@dataclass(frozen=True)
class CompositionBound:
    """``M = max mu(tau^-1{a}) / mu({a})`` over a window and ``M^{1/p}``."""

    ratio: Fraction
    atom: Optional[AtomId]
    bound: CertifiedReal

    def to_dict(self):
        from .verdict import jsonable

        return {"M": str(self.ratio), "atom": jsonable(self.atom), "bound": self.bound.to_dict()}


def composition_bound(space: MeasureSpace, tau: Transformation, idx: LorentzIndex,
                      window: SpaceWindow) -> CompositionBound:
    if not window.atoms:
        raise ValueError("window must be nonempty")
    best, best_atom = None, None
    for a in window.atoms:
        r = measure_of(space, tau.preimage_rule(a)) / space.weight(a)
        if best is None or r > best:
            best, best_atom = r, a
    with mpmath.workprec(PREC):
        value = mpmath.power(_mpf(best), _mpf(idx.inv_p))
        err = abs(value) * mpmath.ldexp(1, 8 - PREC)
    return CompositionBound(best, best_atom, CertifiedReal(value, err))


@dataclass(frozen=True)
class SphereSample:
    """Rational vector whose norm is 1 up to ``defect``."""

    vector: SimpleFunction
    norm: CertifiedReal

    @property
    def defect(self):
        return abs(self.norm.value - 1) + self.norm.abs_error


SPHERE_TOL = 1e-9


def normalize(space: MeasureSpace, g: SimpleFunction, idx: LorentzIndex) -> SphereSample:
    """Scale ``g`` by a rational close to ``1 / ||g||``."""
    if not g:
        raise ValueError("cannot normalize the zero vector")
    norm = lorentz_norm(space, g, idx)
    with mpmath.workprec(PREC):
        man, exp = mpmath.mpf(1 / norm.value).man_exp
    c = Fraction(int(man)) * (Fraction(2) ** exp)
    vec = g.scale(c)
    return SphereSample(vec, lorentz_norm(space, vec, idx))
