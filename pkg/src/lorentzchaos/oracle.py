"""Brute-force cross-checks for the analytic code paths.

Nothing here shares logic with the exact modules beyond the data types:
rearrangements come from a plain sort, norms from float64 quadrature after
the substitution ``u = t^{q/p}``, orbits from pointwise forward iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Optional, Sequence

import mpmath
import numpy as np

from .measure import FINITE, MeasureSpace, Transformation, canonical_key, measure_of
from .operators import CompositionOperator, compose_apply, normalize
from .rearrangement import INF, CertifiedReal, LorentzIndex, SimpleFunction, StepFunction, lorentz_norm
from .verdict import CONFIRMED, REFUTED, PreconditionError, Verdict

SUBSET_GUARD = 10**4
EPS = np.finfo(float).eps


@dataclass(frozen=True)
class OracleReport:
    name: str
    analytic: object
    oracle: object
    discrepancy: object
    tolerance: object
    passed: bool

    def to_dict(self):
        def fmt(x):
            if isinstance(x, Fraction):
                return str(x)
            if isinstance(x, (mpmath.mpf, np.floating)):
                return float(x)
            return x

        return {k: fmt(getattr(self, k)) for k in ("name", "analytic", "oracle", "discrepancy", "tolerance", "passed")}


def rearrangement_by_sort(space: MeasureSpace, g: SimpleFunction) -> StepFunction:
    """Sort atoms by value (ties in canonical order) and accumulate weights."""
    atoms = sorted(g.values, key=lambda a: (-g.values[a], canonical_key(a)))
    ends, vals, acc = [], [], Fraction(0)
    for a in atoms:
        acc += space.weight(a)
        v = g.values[a]
        if vals and vals[-1] == v:
            ends[-1] = acc
        else:
            ends.append(acc)
            vals.append(v)
    return StepFunction(tuple(ends), tuple(vals))


def _simpson(f, a: float, b: float, n: int):
    x = np.linspace(a, b, n + 1)
    w = np.ones(n + 1)
    w[1:-1:2], w[2:-1:2] = 4, 2
    fx = f(x)
    h = (b - a) / n
    return h / 3 * np.dot(w, fx), h / 3 * np.dot(w, np.abs(fx))


def norm_by_quadrature(space: MeasureSpace, g: SimpleFunction, idx: LorentzIndex, mesh: int = 4096) -> CertifiedReal:
    """``||g||_{pq}`` for finite q via ``||g||^q = int_0^inf g**(u^{p/q})^q du``.

    The first plateau and the tail are closed-form; each middle plateau is
    integrated by composite Simpson at ``mesh`` and ``mesh/2`` panels.
    """
    if idx.p == INF or idx.q == INF:
        raise PreconditionError("quadrature oracle needs finite p and q")
    if mesh < 64:
        raise PreconditionError("mesh must be at least 64")
    mesh += mesh % 2
    rearr = rearrangement_by_sort(space, g)
    if not rearr.values:
        return CertifiedReal(mpmath.mpf(0), mpmath.mpf(0))
    p, q = float(idx.p), float(idx.q)
    ratio = q / p
    t = [0.0] + [float(x) for x in rearr.breakpoints]
    total = float(rearr.values[0]) ** q * t[1] ** ratio
    err = 4 * EPS * total
    G = float(rearr.values[0]) * t[1]
    for k in range(1, len(rearr.values)):
        v = float(rearr.values[k])
        base = G - v * t[k]

        def f(u, base=base, v=v):
            tt = u ** (1 / ratio)
            return ((base + v * tt) / tt) ** q

        ua, ub = t[k] ** ratio, t[k + 1] ** ratio
        fine, mag = _simpson(f, ua, ub, mesh)
        coarse, _ = _simpson(f, ua, ub, mesh // 2)
        total += fine
        err += 16 * abs(fine - coarse) + 8 * EPS * mesh * mag
        G += v * (t[k + 1] - t[k])
    S, um = float(rearr.integral()), t[-1] ** ratio
    tail = S**q * um ** (1 - p) / (p - 1)
    total += tail
    err += 8 * EPS * tail
    value = total ** (1 / q)
    abs_error = (total + err) ** (1 / q) - value + 4 * EPS * value
    return CertifiedReal(mpmath.mpf(value), mpmath.mpf(abs_error))


def compose_by_forward(space: MeasureSpace, tau: Transformation, g: SimpleFunction, n: int,
                       atoms: Sequence) -> SimpleFunction:
    """``g o tau^n`` evaluated pointwise on ``atoms`` by iterating ``tau`` forward."""
    out = {}
    for a in atoms:
        b = a
        for _ in range(n):
            b = tau.forward(b)
        v = g[b]
        if v:
            out[a] = v
    return SimpleFunction(out)


def level_measures(space: MeasureSpace, g: SimpleFunction) -> tuple:
    """``((value, mu(level set)), ...)`` by decreasing value."""
    lv = g.levels()
    return tuple(sorted(((v, measure_of(space, s)) for v, s in lv.items()), reverse=True))


def direct_orbit_levels(space: MeasureSpace, tau: Transformation, g: SimpleFunction, horizon: int,
                        atoms: Sequence) -> list:
    return [level_measures(space, compose_by_forward(space, tau, g, n, atoms)) for n in range(horizon + 1)]


def _subsets(atoms, max_set_size):
    count = sum(math.comb(len(atoms), k) for k in range(1, max_set_size + 1))
    if count > SUBSET_GUARD:
        raise PreconditionError(f"{count} subsets exceed the guard of {SUBSET_GUARD}")
    for k in range(1, max_set_size + 1):
        yield from combinations(atoms, k)


def _direct_conclusion(space, tau, A, idx, horizon):
    """Iterate a normalized indicator directly; classify as bounded / growing / unclear."""
    op = CompositionOperator(space, tau)
    g = normalize(space, SimpleFunction.indicator(A), idx).vector
    seen, norms = {}, []
    state = "unclear"
    for n in range(horizon + 1):
        h = compose_apply(op, g, n)
        norms.append(lorentz_norm(space, h, idx))
        if not h:
            state = "bounded"
            break
        if h in seen:
            state = "bounded"
            break
        seen[h] = n
    if state == "unclear" and len(norms) > 5 and all(norms[k + 1].lower > norms[k].upper for k in range(len(norms) - 6, len(norms) - 1)):
        state = "growing"
    return state, norms


def criterion_by_definition(space: MeasureSpace, tau: Transformation, idx: LorentzIndex, max_set_size: int,
                            horizon: int, window: int = 8, verdict: Optional[Verdict] = None) -> list:
    """Exhaustive orbit-norm evidence on all small subsets, compared with a verdict.

    One report per subset compares the observed last-step norm factor with
    ``(mu(tau^{-H} A) / mu(tau^{-H+1} A))^{1/p}``; a final report checks that
    the positive-expansivity verdict is not contradicted.
    """
    if max_set_size < 1 or max_set_size > 4:
        raise PreconditionError("max_set_size must be between 1 and 4")
    atoms = list(space.atoms()) if space.kind == FINITE else list(space.window(window).atoms)
    subsets = list(_subsets(atoms, max_set_size))
    if verdict is None:
        from .expansivity import positively_expansive

        verdict = positively_expansive(space, tau, max(horizon, 4), window=len(atoms))
    reports, states = [], {}
    tol = 1e-9
    for A in subsets:
        state, norms = _direct_conclusion(space, tau, A, idx, horizon)
        states[frozenset(A)] = state
        if len(norms) < horizon + 1 or norms[-2].value == 0:
            continue
        m_prev = measure_of(space, _preimage_n(tau, A, horizon - 1))
        m_last = measure_of(space, _preimage_n(tau, A, horizon))
        expected = (mpmath.mpf(m_last.numerator) / m_last.denominator
                    / (mpmath.mpf(m_prev.numerator) / m_prev.denominator)) ** float(idx.inv_p)
        observed = norms[-1].value / norms[-2].value
        disc = abs(expected - observed)
        reports.append(OracleReport(f"growth{sorted(A, key=canonical_key)}", float(expected), float(observed),
                                    float(disc), tol, bool(disc <= tol)))
    if verdict.status == CONFIRMED:
        contradicted = [A for A, s in states.items() if s == "bounded" and len(A) == 1]
    elif verdict.status == REFUTED:
        w = verdict.witness.get("atom")
        s = states.get(frozenset([w])) if w is not None else None
        if s is None and w is not None:
            s, _ = _direct_conclusion(space, tau, [w], idx, horizon)
        contradicted = [w] if s == "growing" else []
    else:
        contradicted = []
    reports.append(OracleReport("verdict_agreement", verdict.status,
                                "contradicted" if contradicted else "consistent",
                                len(contradicted), 0, not contradicted))
    return reports


def _preimage_n(tau, A, n):
    cur = frozenset(A)
    for _ in range(n):
        nxt = set()
        for a in cur:
            nxt.update(tau.preimage_rule(a))
        cur = frozenset(nxt)
    return cur


def _log_norm_pq2(logv: np.ndarray, w: np.ndarray) -> np.ndarray:
    """``log ||g||_{2,2}`` for rows of log-values (``-inf`` = zero) over fixed atom weights."""
    top = logv.max(axis=-1, keepdims=True)
    dead = ~np.isfinite(top[..., 0])
    top = np.where(np.isfinite(top), top, 0.0)
    v = np.exp(logv - top)  # in [0, 1], exp(-inf) = 0
    order = np.argsort(-v, axis=-1, kind="stable")
    v = np.take_along_axis(v, order, axis=-1)
    ww = np.broadcast_to(w, v.shape)
    ww = np.take_along_axis(ww, order, axis=-1)
    b = np.cumsum(ww, axis=-1)
    a = b - ww
    G_end = np.cumsum(v * ww, axis=-1)
    G_start = G_end - v * ww
    B = G_start - v * a
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.where(a > 0, 1 / np.where(a > 0, a, 1) - 1 / b, 0.0)
        logr = np.where(a > 0, np.log(np.where(a > 0, b / np.where(a > 0, a, 1), 1)), 0.0)
    pieces = B**2 * inv + 2 * B * v * logr + v**2 * (b - a)
    total = pieces.sum(axis=-1) + G_end[..., -1] ** 2 / b[..., -1]
    with np.errstate(divide="ignore"):
        out = top[..., 0] + 0.5 * np.log(total)
    return np.where(dead, -np.inf, out)


def multiplication_sweep(weights: Sequence, theta: Sequence, horizon: int = 200, low: float = 1e-6,
                         high: float = 1e6) -> dict:
    """Orbit norms of ``M_theta^n chi_A`` (p = q = 2) for every nonempty ``A``, in float64.

    Returns counts of indicator vectors classified irregular / semi-irregular
    at the horizon.  Norms are handled in log space so ``theta^200`` is safe.
    """
    w = np.array([float(x) for x in weights])
    th = np.array([float(x) for x in theta])
    k = len(w)
    if k > 12:
        raise PreconditionError("at most 12 atoms")
    masks = np.array([[(s >> i) & 1 for i in range(k)] for s in range(1, 2**k)], dtype=bool)
    n = np.arange(horizon + 1, dtype=float)[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        logth = np.log(th)
        step = np.where(n == 0, 0.0, n * logth)  # theta^0 = 1 even where theta = 0
    logv = np.where(masks[:, None, :], step[None, :, :], -np.inf)
    ln = _log_norm_pq2(logv, w)  # (subsets, horizon + 1)
    base = ln[:, :1]
    lo = ln.min(axis=1)
    hi = ln.max(axis=1)
    dips = lo <= base[:, 0] + math.log(low)
    irregular = dips & (hi >= base[:, 0] + math.log(high))
    semi = dips & ~irregular & (hi >= base[:, 0] - math.log(2))
    return {
        "vectors": int(len(masks)),
        "irregular": int(irregular.sum()),
        "semi_irregular": int(semi.sum()),
        "horizon": horizon,
    }
