"""Run configured analyses, emit JSON reports and CSV traces, and replay report evidence."""

from __future__ import annotations

import csv
import json
from fractions import Fraction
from pathlib import Path

import mpmath

from . import __version__
from .chaos import (
    NonInjectiveError,
    corollary_conditions,
    finite_measure_equivalences,
    injective_li_yorke_criterion,
    irregular_vector_search,
    li_yorke_criterion,
    multiplication_li_yorke,
)
from .config import AnalysisConfig, ConfigError, atom_from_json, parse_config
from .expansivity import (
    expansive_invertible,
    positively_expansive,
    sphere_divergence_probe,
    uniformly_expansive_split,
    uniformly_positively_expansive,
)
from .measure import check_injective, measure_of
from .operators import (
    CompositionOperator,
    OrbitTrace,
    classify_orbit,
    composition_bound,
    normalize,
    orbit_trace,
)
from .rearrangement import PREC, LorentzIndex, SimpleFunction, lorentz_norm
from .verdict import PreconditionError, image_orbit, jsonable, preimage_orbit

SCHEMA_VERSION = "1"
PRECONDITION_FAILED = "PRECONDITION_FAILED"
NORM_DIGITS = 30

NON_INJECTIVE_CAVEAT = (
    "tau is not injective: conditions (a) and (b) below are reported for reference only; "
    "without injectivity they do not imply Li-Yorke chaos"
)


def _need_tau(cfg: AnalysisConfig):
    if cfg.tau is None:
        raise PreconditionError("this analysis needs a transformation")
    return cfg.tau


def _need_vector(cfg: AnalysisConfig) -> SimpleFunction:
    if cfg.vector is not None:
        return cfg.vector
    first = next(iter(cfg.space.atoms()))
    return SimpleFunction.indicator([first])


def _operator(cfg: AnalysisConfig):
    """The multiplier when one is configured, else ``C_tau``."""
    if cfg.multiplier is not None:
        return cfg.multiplier
    return CompositionOperator(cfg.space, _need_tau(cfg))


def trace_evidence(trace: OrbitTrace) -> dict:
    return {
        "kind": "orbit_norms",
        "operator": trace.operator,
        "index": trace.index.to_dict(),
        "vector": trace.vector.to_dict(),
        "measures": [e.measure for e in trace.entries],
        "norms": [mpmath.nstr(e.norm.value, NORM_DIGITS) for e in trace.entries],
        "abs_errors": [mpmath.nstr(e.norm.abs_error, 3) for e in trace.entries],
    }


def _orbit(cfg, idx):
    trace = orbit_trace(_operator(cfg), _need_vector(cfg), idx, cfg.horizon)
    cls = classify_orbit(trace)
    return {"orbit_class": cls.to_dict(), "evidence": [trace_evidence(trace)]}


def _injective(cfg, idx):
    if cfg.target_set is None:
        raise PreconditionError("injective_li_yorke_criterion needs a 'set'")
    tau = _need_tau(cfg)
    try:
        return injective_li_yorke_criterion(cfg.space, tau, cfg.target_set, cfg.horizon, cfg.window,
                                            cfg.low, cfg.high).to_dict()
    except NonInjectiveError as exc:
        conds = corollary_conditions(cfg.space, tau, cfg.target_set, cfg.horizon, cfg.low, cfg.high)
        return {
            "status": PRECONDITION_FAILED,
            "error": str(exc),
            "caveat": NON_INJECTIVE_CAVEAT,
            "injectivity": exc.verdict.to_dict(),
            "conditions": {k: v.to_dict() for k, v in conds.items()},
        }


def _search(cfg, idx):
    res = irregular_vector_search(cfg.space, _need_tau(cfg), idx, cfg.horizon, cfg.ratio_target, cfg.window,
                                  low=cfg.low)
    trace = orbit_trace(CompositionOperator(cfg.space, cfg.tau), res.vector, idx, cfg.horizon)
    out = res.to_dict()
    out["evidence"] = [trace_evidence(trace)]
    return out


def _split(cfg, idx):
    verdict, cert = uniformly_expansive_split(cfg.space, _need_tau(cfg), cfg.horizon, cfg.window)
    out = verdict.to_dict()
    out["certificate"] = cert.to_dict() if cert else None
    return out


def _probe(cfg, idx):
    atoms = list(cfg.space.window(cfg.samples).atoms)
    samples = [normalize(cfg.space, SimpleFunction.indicator([a]), idx) for a in atoms]
    rep = sphere_divergence_probe(_operator(cfg), idx, samples, cfg.horizon, cfg.divergence)
    out = rep.to_dict()
    out["samples"] = jsonable(atoms)
    return out


def _bound(cfg, idx):
    return composition_bound(cfg.space, _need_tau(cfg), idx, cfg.space.window(cfg.window)).to_dict()


def _multiplication(cfg, idx):
    if cfg.multiplier is None:
        raise PreconditionError("multiplication_li_yorke needs a 'multiplier'")
    return multiplication_li_yorke(cfg.space, cfg.multiplier, cfg.window).to_dict()


RUNNERS = {
    "check_injective": (False, lambda c, i: check_injective(c.space, _need_tau(c), c.space.window(c.window)).to_dict()),
    "composition_bound": (True, _bound),
    "orbit": (True, _orbit),
    "li_yorke_criterion": (False, lambda c, i: li_yorke_criterion(
        c.space, _need_tau(c), c.horizon, c.candidate_sets, c.window, c.low, c.high).to_dict()),
    "injective_li_yorke_criterion": (False, _injective),
    "finite_measure_equivalences": (True, lambda c, i: finite_measure_equivalences(
        c.space, _need_tau(c), i, c.horizon, c.probe_sets, c.window, c.low, c.vector).to_dict()),
    "irregular_vector_search": (True, _search),
    "multiplication_li_yorke": (False, _multiplication),
    "positively_expansive": (False, lambda c, i: positively_expansive(c.space, _need_tau(c), c.horizon, c.window).to_dict()),
    "uniformly_positively_expansive": (False, lambda c, i: uniformly_positively_expansive(
        c.space, _need_tau(c), c.horizon, c.window).to_dict()),
    "expansive_invertible": (False, lambda c, i: expansive_invertible(c.space, _need_tau(c), c.horizon, c.window).to_dict()),
    "uniformly_expansive_split": (False, _split),
    "sphere_divergence_probe": (True, _probe),
}


def run(cfg: AnalysisConfig) -> dict:
    """Execute the configured analyses in order; precondition failures are recorded, not raised."""
    results = []
    for name in cfg.analyses:
        per_index, runner = RUNNERS[name]
        for idx in cfg.indices if per_index else [None]:
            entry = {"analysis": name}
            if idx is not None:
                entry["index"] = idx.to_dict()
            try:
                entry["result"] = runner(cfg, idx if idx is not None else cfg.indices[0])
            except (PreconditionError, ValueError, ArithmeticError) as exc:
                entry["result"] = {"status": PRECONDITION_FAILED, "error": str(exc)}
            results.append(entry)
    return {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "config": cfg.raw,
        "results": jsonable(results),
    }


def has_precondition_failure(report: dict) -> bool:
    return any(r["result"].get("status") == PRECONDITION_FAILED for r in report["results"])


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, ensure_ascii=False) + "\n"


def export_orbit_csv(trace: OrbitTrace, path) -> Path:
    """One row per iterate: ``n,measure_num,measure_den,norm,norm_abs_error``."""
    if not path:
        raise ValueError("empty output path")
    if not trace.entries:
        raise ValueError("empty trace")
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "measure_num", "measure_den", "norm", "norm_abs_error"])
        for e in trace.entries:
            w.writerow([e.n, e.measure.numerator, e.measure.denominator,
                        mpmath.nstr(e.norm.value, NORM_DIGITS), mpmath.nstr(e.norm.abs_error, 3)])
    return path


# -- replay -----------------------------------------------------------------

def _set(xs) -> frozenset:
    return frozenset(atom_from_json(x) for x in xs)


def _iter_evidence(obj):
    if isinstance(obj, dict):
        if "kind" in obj:
            yield obj
        for v in obj.values():
            yield from _iter_evidence(v)
    elif isinstance(obj, list):
        for v in obj:
            yield from _iter_evidence(v)


def _replay(cfg: AnalysisConfig, ev: dict):
    kind = ev["kind"]
    if kind in ("preimage_measures", "image_measures"):
        fn = preimage_orbit if kind == "preimage_measures" else image_orbit
        got = fn(cfg.space, cfg.tau, _set(ev["set"]), len(ev["values"]) - 1).measures
        want = [Fraction(v) for v in ev["values"]]
        return list(got) == want, f"{kind} of {ev['set']}"
    if kind == "collision":
        a, b = (atom_from_json(x) for x in ev["atoms"])
        img = atom_from_json(ev["image"])
        return a != b and cfg.tau.forward(a) == img == cfg.tau.forward(b), f"collision {ev['atoms']}"
    if kind == "theta_class":
        a = atom_from_json(ev["atom"])
        t = cfg.multiplier.at(a)
        cls = "<1" if t < 1 else ("=1" if t == 1 else ">1")
        return Fraction(ev["theta"]) == t and ev["class"] == cls, f"theta at {ev['atom']}"
    if kind == "orbit_norms":
        idx = LorentzIndex(ev["index"]["p"], ev["index"]["q"])
        vec = SimpleFunction({atom_from_json(a): v for a, v in ev["vector"]})
        op = cfg.multiplier if ev["operator"] == "multiplication" else CompositionOperator(cfg.space, cfg.tau)
        trace = orbit_trace(op, vec, idx, len(ev["norms"]) - 1)
        ok = [Fraction(m) for m in ev["measures"]] == trace.measures()
        with mpmath.workprec(PREC):
            for e, s, err in zip(trace.entries, ev["norms"], ev["abs_errors"]):
                tol = e.norm.abs_error + mpmath.mpf(err) + abs(e.norm.value) * mpmath.mpf(10) ** (1 - NORM_DIGITS)
                ok = ok and abs(e.norm.value - mpmath.mpf(s)) <= tol
        return ok, "orbit norms"
    return True, f"unknown evidence kind {kind!r} skipped"


def verify(report: dict) -> list:
    """Recompute every evidence record in ``report``; return a list of mismatch descriptions."""
    if report.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {report.get('schema_version')!r}")
    cfg = parse_config(report["config"])
    failures = []
    for entry in report["results"]:
        for ev in _iter_evidence(entry["result"]):
            ok, what = _replay(cfg, ev)
            if not ok:
                failures.append(f"{entry['analysis']}: {what}")
    return failures


def norm_table(cfg: AnalysisConfig) -> dict:
    vec = _need_vector(cfg)
    rows = []
    for idx in cfg.indices:
        n = lorentz_norm(cfg.space, vec, idx)
        rows.append({"index": idx.to_dict(), "norm": n.to_dict(NORM_DIGITS),
                     "support_measure": measure_of(cfg.space, vec.support)})
    return jsonable({"vector": vec.to_dict(), "norms": rows})
