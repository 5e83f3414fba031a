"""Scenario runner: ``lipdiff run scenario.json`` and ``lipdiff catalog``.

A scenario is a JSON object with a ``schema`` tag, a ``name``, a
``pipeline`` and a mandatory integer ``seed``.  Reports are written as JSON
with sorted keys; everything except ``wall_time`` is reproducible.

Exit codes: 0 certified/pass, 1 execution error, 2 refuted, 3 inconclusive.
"""

import argparse
import csv
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .derived import StepSchedule, derived_set_estimate
from .errors import HypothesisFailure, LipdiffError, ParseError
from .karcher import karcher_mean, karcher_regularity_pipeline, read_matrix
from .maps import EvaluableMap, MapPair, catalog_get, catalog_names, rng_for
from .regularity import default_radii, lipschitz_estimate
from .theorems import CertifyConfig, chain_rule_check, converse_ift_certify, density_probe

SCENARIO_SCHEMA = "lipdiff.scenario/1"
REPORT_SCHEMA = "lipdiff.report/1"
PIPELINES = ("certify", "chain-rule", "derived-set", "density-probe", "lipschitz",
             "karcher-mean", "karcher-regularity")

EXIT_PASS, EXIT_ERROR, EXIT_REFUTED, EXIT_INCONCLUSIVE = 0, 1, 2, 3
_VERDICT_EXIT = {"certified": EXIT_PASS, "pass": EXIT_PASS, "lipschitz": EXIT_PASS,
                 "refuted": EXIT_REFUTED, "fail": EXIT_REFUTED, "blowup": EXIT_REFUTED,
                 "inconclusive": EXIT_INCONCLUSIVE}


@dataclass
class Scenario:
    name: str
    pipeline: str
    seed: int
    raw: dict
    base_dir: str = "."

    def get(self, key, default=None):
        return self.raw.get(key, default)

    def vector(self, key, default=None):
        val = self.raw.get(key, default)
        if val is None:
            raise ParseError("missing vector", field=key)
        try:
            v = np.atleast_1d(np.asarray(val, dtype=float))
        except (TypeError, ValueError):
            raise ParseError("expected a number or list of numbers", field=key) from None
        if v.ndim != 1 or not np.all(np.isfinite(v)):
            raise ParseError("expected a finite vector", field=key)
        return v

    def tolerance(self, key, default):
        tol = self.raw.get("tolerances", {}).get(key, default)
        return tol

    def schedule(self, key="schedule"):
        entry = self.raw.get(key)
        if entry is None:
            return None
        try:
            return StepSchedule(**entry)
        except (TypeError, ValueError) as exc:
            raise ParseError(str(exc), field=key) from None

    def matrix(self, entry, key):
        if isinstance(entry, str):
            return read_matrix(os.path.join(self.base_dir, entry))
        try:
            return np.asarray(entry, dtype=float)
        except (TypeError, ValueError):
            raise ParseError("expected a matrix or a matrix file path", field=key) from None


@dataclass
class ReportEnvelope:
    scenario: dict
    verdict: str
    exit_code: int
    report: dict
    reason: str = ""
    wall_time: float = 0.0
    profiles: dict = field(default_factory=dict, repr=False)

    def to_dict(self, include_wall_time=True):
        out = {
            "schema": REPORT_SCHEMA,
            "version": __version__,
            "scenario": self.scenario,
            "verdict": self.verdict,
            "reason": self.reason,
            "exit_code": self.exit_code,
            "report": self.report,
        }
        if include_wall_time:
            out["wall_time"] = self.wall_time
        return out

    def to_json(self, include_wall_time=True):
        return json.dumps(_jsonable(self.to_dict(include_wall_time)), sort_keys=True, indent=2,
                          allow_nan=False)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else ("nan" if math.isnan(x) else ("inf" if x > 0 else "-inf"))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def load_scenario(path):
    """Parse and validate a scenario file; raise ParseError on any defect."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read scenario: {exc}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc.msg}", line=exc.lineno) from None
    if not isinstance(raw, dict):
        raise ParseError("scenario must be a JSON object")
    if raw.get("schema") != SCENARIO_SCHEMA:
        raise ParseError(f"unsupported schema, expected {SCENARIO_SCHEMA!r}", field="schema")
    for key in ("name", "pipeline"):
        if not isinstance(raw.get(key), str) or not raw[key]:
            raise ParseError("required string", field=key)
    if raw["pipeline"] not in PIPELINES:
        raise ParseError(f"unknown pipeline, expected one of {PIPELINES}", field="pipeline")
    seed = raw.get("seed")
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ParseError("seed is mandatory and must be an integer", field="seed")
    tols = raw.get("tolerances", {})
    if not isinstance(tols, dict):
        raise ParseError("expected an object", field="tolerances")
    for key, val in tols.items():
        if not isinstance(val, (int, float)) or not val > 0:
            raise ParseError("tolerances must be positive numbers", field=f"tolerances.{key}")
    base_dir = os.path.dirname(os.path.abspath(path))
    for key in ("operands", "fixed"):
        for i, entry in enumerate(raw.get(key, []) or []):
            if isinstance(entry, str) and not os.path.exists(os.path.join(base_dir, entry)):
                raise ParseError(f"matrix file {entry!r} not found", field=f"{key}[{i}]")
    if isinstance(raw.get("Y0"), str) and not os.path.exists(os.path.join(base_dir, raw["Y0"])):
        raise ParseError(f"matrix file {raw['Y0']!r} not found", field="Y0")
    return Scenario(raw["name"], raw["pipeline"], seed, raw, base_dir)


def _select_map(sc):
    entry = sc.get("map")
    if isinstance(entry, str):
        entry = {"name": entry}
    if not isinstance(entry, dict) or "name" not in entry:
        raise ParseError("expected a catalog name or {name, params}", field="map")
    params = dict(entry.get("params", {}))
    if entry["name"] == "karcher-pair":
        if "fixed" in params:
            params["fixed"] = [sc.matrix(m, "map.params.fixed") for m in params["fixed"]]
        if "Y0" in params:
            params["Y0"] = sc.matrix(params["Y0"], "map.params.Y0")
    try:
        obj = catalog_get(entry["name"], **params)
    except TypeError as exc:
        raise ParseError(str(exc), field="map.params") from None
    return obj, entry.get("side", "g")


def _pair(sc):
    obj, _ = _select_map(sc)
    if not isinstance(obj, MapPair):
        raise ParseError("this pipeline needs an inverse pair, not a standalone map", field="map")
    return obj


def _single_map(sc):
    obj, side = _select_map(sc)
    if isinstance(obj, EvaluableMap):
        return obj
    if side not in ("g", "f"):
        raise ParseError("side must be 'g' or 'f'", field="map.side")
    return getattr(obj, side)


def _certify_config(sc):
    cfg = dict(sc.get("config", {}))
    cfg.setdefault("seed", sc.seed)
    tols = sc.get("tolerances", {})
    for key in ("inverse_tol", "consistency_tol", "identity_tol"):
        if key in tols:
            cfg[key] = tols[key]
    try:
        return CertifyConfig.from_dict(cfg)
    except TypeError as exc:
        raise ParseError(str(exc), field="config") from None


def _run_certify(sc):
    pair = _pair(sc)
    cert = converse_ift_certify(pair, sc.vector("x"), _certify_config(sc))
    return cert.verdict, cert.reason, cert.to_dict(), cert.profiles()


def _run_karcher_regularity(sc):
    fixed = [sc.matrix(m, "fixed") for m in sc.get("fixed", [])]
    if not fixed:
        raise ParseError("need at least one fixed operand", field="fixed")
    Y0 = sc.matrix(sc.get("Y0"), "Y0")
    cert = karcher_regularity_pipeline(fixed, Y0, _certify_config(sc))
    return cert.verdict, cert.reason, cert.to_dict(), cert.profiles()


def _run_chain_rule(sc):
    pair = _pair(sc)
    try:
        rep = chain_rule_check(pair, sc.vector("x"), sc.vector("v"), sc.schedule(),
                               tol=sc.tolerance("tol", 1e-6),
                               cluster_tol=sc.get("tolerances", {}).get("cluster_tol"),
                               seed=sc.seed)
    except HypothesisFailure as exc:
        return "refuted", exc.reason, {"hypothesis_failure": exc.reason, "message": str(exc)}, {}
    profiles = {
        "lhs_quotients": rep.lhs.csv_rows(),
        "rhs_quotients": rep.rhs.csv_rows(),
        "epsilon_trace": rep.csv_rows(),
    }
    return ("pass" if rep.passed else "fail"), "", rep.to_dict(), profiles


def _run_derived_set(sc):
    f = _single_map(sc)
    s = derived_set_estimate(f, sc.vector("y"), sc.vector("v"), sc.schedule(),
                             sc.get("tolerances", {}).get("cluster_tol"))
    return "pass", s.verdict, s.to_dict(), {"quotients": s.csv_rows()}


def _run_density(sc):
    pair = _pair(sc)
    rep = density_probe(pair, sc.vector("x"), sc.vector("w"), sc.schedule(), seed=sc.seed)
    step1_tol = sc.tolerance("step1", 1e-9)
    if rep.step1_max > step1_tol:
        verdict, reason = "fail", "step1-identity"
    elif not rep.bound_ok:
        verdict, reason = "fail", "zt-bound"
    elif not rep.gap_decreasing:
        verdict, reason = "fail", "gap-not-decreasing"
    else:
        verdict, reason = "pass", ""
    return verdict, reason, rep.to_dict(), {"density_trace": rep.csv_rows()}


def _run_lipschitz(sc):
    f = _single_map(sc)
    center = sc.vector("center")
    radii = sc.get("radii") or default_radii(f.domain, center)
    est = lipschitz_estimate(f, center, radii, int(sc.get("pairs_per_radius", 64)),
                             rng=rng_for(sc.seed, "lipschitz"))
    return est.verdict, "", est.to_dict(), {"lipschitz_profile": est.csv_rows()}


def _run_karcher_mean(sc):
    ops = [sc.matrix(m, "operands") for m in sc.get("operands", [])]
    if not ops:
        raise ParseError("need at least one operand", field="operands")
    tol = sc.tolerance("tol", 1e-10)
    tr = karcher_mean(ops, tol=tol, max_iter=int(sc.get("max_iter", 500)))
    verdict = "pass" if tr.converged else "inconclusive"
    return verdict, "" if tr.converged else "no-convergence", tr.to_dict(), \
        {"karcher_residuals": tr.csv_rows()}


_RUNNERS = {
    "certify": _run_certify,
    "chain-rule": _run_chain_rule,
    "derived-set": _run_derived_set,
    "density-probe": _run_density,
    "lipschitz": _run_lipschitz,
    "karcher-mean": _run_karcher_mean,
    "karcher-regularity": _run_karcher_regularity,
}


def run_scenario(path):
    """Run the scenario at ``path`` and return its ReportEnvelope."""
    start = time.perf_counter()
    try:
        sc = load_scenario(path)
    except ParseError as exc:
        return ReportEnvelope({"path": str(path)}, "error", EXIT_ERROR,
                              {"error": {"type": "ParseError", "message": str(exc),
                                         "field": exc.field, "line": exc.line}})
    try:
        verdict, reason, report, profiles = _RUNNERS[sc.pipeline](sc)
        code = _VERDICT_EXIT.get(verdict, EXIT_PASS)
    except (LipdiffError, ValueError) as exc:
        verdict, reason, profiles, code = "error", type(exc).__name__, {}, EXIT_ERROR
        report = {"error": {"type": type(exc).__name__, "message": str(exc)}}
        if isinstance(exc, ParseError):
            report["error"].update(field=exc.field, line=exc.line)
    return ReportEnvelope(sc.raw, verdict, code, report, reason,
                          time.perf_counter() - start, profiles)


def emit_profiles(envelope, directory):
    """Write one CSV per profile as ``<scenario>_<profile>.csv``; return the paths."""
    os.makedirs(directory, exist_ok=True)
    name = envelope.scenario.get("name", "scenario")
    paths = []
    for key in sorted(envelope.profiles):
        header, rows = envelope.profiles[key]
        path = os.path.join(directory, f"{name}_{key}.csv")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
        paths.append(path)
    return paths


def main(argv=None):
    parser = argparse.ArgumentParser(prog="lipdiff", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario file")
    run.add_argument("scenario")
    run.add_argument("--out", help="write the JSON report here instead of stdout")
    run.add_argument("--profiles", help="directory for CSV profiles")
    sub.add_parser("catalog", help="list built-in maps")
    args = parser.parse_args(argv)

    if args.command == "catalog":
        for name, kind in sorted(catalog_names().items()):
            print(f"{name}\t{kind}")
        return EXIT_PASS

    env = run_scenario(args.scenario)
    text = env.to_json()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    if args.profiles and env.profiles:
        try:
            emit_profiles(env, args.profiles)
        except OSError as exc:
            print(f"lipdiff: cannot write profiles: {exc}", file=sys.stderr)
            return EXIT_ERROR
    return env.exit_code


if __name__ == "__main__":
    sys.exit(main())
