"""Experiment configs, CSV traces and invariant reports.

A run is described by one JSON document::

    {
      "space": {"p": 2, "dim": 2},
      "operator": {"kind": "contraction_scale", "params": {"lam": 0.5}},
      "scheme": {"name": "nested", "t_schedule": {"kind": "harmonic"}},
      "sampler": {"samples_per_round": 2000, "seed": 0},
      "anchor": [1, 1],
      "stopping": {"max_iter": 500, "stop_tol": 1e-6, "proj_tol": 1e-8},
      "output": {"csv_path": "run.csv"}
    }

Only ``space``, ``operator`` and ``anchor`` are required; unknown keys are
rejected. Traces are written as CSV (``n, x0..x{d-1}`` followed by the
observables in ``TRACE_FIELDS``) with a ``.meta.json`` sidecar holding the
stopping reason, the config echo and the cutting half-spaces.
"""

import copy
import csv
from dataclasses import dataclass
import json
import math
import os

import jsonschema
import numpy as np

from .errors import ConfigError, SchemaError, SemanticError
from .levelset import SamplerConfig
from .operators import KINDS, make_operator
from .projection import HalfSpace
from .schemes import SCHEMES, TRACE_FIELDS, RunTrace, Schedule, run_scheme
from .space import Geometry, norm

__all__ = ["CONFIG_SCHEMA", "ExperimentConfig", "parse_config", "load_config",
           "build_operator", "run_experiment", "check_report", "write_trace",
           "read_trace", "sweep", "set_param", "TOLERANCES"]

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_SCHED = {
    "type": "object",
    "additionalProperties": False,
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["harmonic", "geometric", "constant_alpha"]},
        "params": {"type": "object", "additionalProperties": _NUM},
    },
}
_DOMAIN = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "type": {"enum": ["box", "ball"]},
        "lower": {"oneOf": [_NUM, {"type": "array", "items": _NUM}]},
        "upper": {"oneOf": [_NUM, {"type": "array", "items": _NUM}]},
        "radius": _POS,
        "center": {"type": "array", "items": _NUM},
    },
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "hybridproj experiment",
    "type": "object",
    "additionalProperties": False,
    "required": ["space", "operator", "anchor"],
    "properties": {
        "space": {
            "type": "object", "additionalProperties": False,
            "required": ["p", "dim"],
            "properties": {"p": _NUM, "dim": {"type": "integer", "minimum": 1}},
        },
        "operator": {
            "type": "object", "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": list(KINDS)},
                "params": {"type": "object"},
                "domain": _DOMAIN,
            },
        },
        "scheme": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "name": {"enum": list(SCHEMES)},
                "t_schedule": _SCHED,
                "alpha_schedule": _SCHED,
            },
        },
        "sampler": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "samples_per_round": {"type": "integer", "minimum": 2},
                "importance_fraction": {"type": "number", "minimum": 0, "maximum": 1},
                "seed": {"type": "integer", "minimum": 0},
                "max_hull_vertices": {"type": ["integer", "null"], "minimum": 2},
                "boundary_rays": {"type": "integer", "minimum": 0},
                "descent_steps": {"type": "integer", "minimum": 0},
                "refine_rounds": {"type": "integer", "minimum": 0},
            },
        },
        "anchor": {"type": "array", "items": _NUM, "minItems": 1},
        "stopping": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "max_iter": {"type": "integer", "minimum": 0},
                "stop_tol": _POS,
                "proj_tol": _POS,
            },
        },
        "output": {
            "type": "object", "additionalProperties": False,
            "properties": {"csv_path": {"type": ["string", "null"]}},
        },
    },
}

DEFAULTS = {
    "scheme": {"name": "nested", "t_schedule": {"kind": "harmonic", "params": {}},
               "alpha_schedule": {"kind": "constant_alpha", "params": {}}},
    "sampler": {"samples_per_round": 2000, "importance_fraction": 0.5, "seed": 0,
                "max_hull_vertices": None, "boundary_rays": 64, "descent_steps": 200,
                "refine_rounds": 4},
    "stopping": {"max_iter": 500, "stop_tol": 1e-6, "proj_tol": 1e-8},
    "output": {"csv_path": None},
}

# tolerances used by check_report
TOLERANCES = {
    "monotone_anchor_distance": 1e-9,
    "anchor_distance_bound": 1e-7,
    "fixed_point_d_feasibility": 1e-8,
    "fixed_point_level_condition": 0.0,
    "residual_diagnostics": 1e-2,
    "convergence": 1e-2,
    "projection_certificate": 1e-7,
}


@dataclass
class ExperimentConfig:
    """Validated experiment description with defaults applied."""

    geom: Geometry
    operator: dict
    scheme: str
    t_schedule: Schedule
    alpha_schedule: Schedule
    sampler: SamplerConfig
    anchor: np.ndarray
    max_iter: int
    stop_tol: float
    proj_tol: float
    csv_path: str
    document: dict


def _pointer(path):
    return "".join(f"/{p}" for p in path)


def _merge(defaults, given):
    out = copy.deepcopy(defaults)
    for key, val in given.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def parse_config(text):
    """Parse and validate a JSON config document.

    Raises
    ------
    SchemaError
        On malformed JSON or schema violations (``pointer`` locates them).
    SemanticError
        On schema-valid but inadmissible settings, e.g. ``p <= 1`` or the
        ``nt`` scheme with ``p != 2``.
    """
    if isinstance(text, (bytes, str)):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON: {exc}") from exc
    else:
        doc = copy.deepcopy(text)
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise SchemaError(err.message, _pointer(err.absolute_path))
    doc = _merge(DEFAULTS, doc)

    p, dim = doc["space"]["p"], doc["space"]["dim"]
    if not (1 < p < math.inf):
        raise SemanticError(f"exponent must satisfy 1 < p < inf, got p={p}")
    geom = Geometry(dim, p)
    if len(doc["anchor"]) != dim:
        raise SemanticError(f"anchor has {len(doc['anchor'])} entries, expected {dim}")
    name = doc["scheme"]["name"]
    if name == "nt" and not geom.euclidean:
        raise SemanticError(f"scheme nt requires p = 2, got p={p}")
    try:
        t_sched = Schedule(**doc["scheme"]["t_schedule"])
        a_sched = Schedule(**doc["scheme"]["alpha_schedule"])
        sampler = SamplerConfig(**doc["sampler"]).validate(dim)
        op = make_operator(geom, doc["operator"]["kind"], doc["operator"].get("params"),
                           doc["operator"].get("domain"))
    except (TypeError, ValueError, KeyError) as exc:
        raise SemanticError(str(exc)) from exc
    if not op.domain.contains(np.asarray(doc["anchor"], dtype=float), 1e-8)[0]:
        raise SemanticError("anchor lies outside the operator domain")
    if name in ("mt", "nt") and not op.nonexpansive:
        raise SemanticError(f"scheme {name} needs a nonexpansive operator")
    stop = doc["stopping"]
    return ExperimentConfig(geom, doc["operator"], name, t_sched, a_sched, sampler,
                            np.asarray(doc["anchor"], dtype=float), stop["max_iter"],
                            float(stop["stop_tol"]), float(stop["proj_tol"]),
                            doc["output"]["csv_path"], doc)


def load_config(path):
    """Read and parse a config file; unreadable files are config errors."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return parse_config(text)


def build_operator(cfg):
    o = cfg.operator
    return make_operator(cfg.geom, o["kind"], o.get("params"), o.get("domain"))


def run_experiment(cfg, csv_path=None):
    """Run the configured scheme; writes the CSV when a path is configured."""
    op = build_operator(cfg)
    trace = run_scheme(cfg.geom, op, cfg.anchor, cfg.scheme, cfg.t_schedule,
                       cfg.alpha_schedule, cfg.sampler, cfg.max_iter, cfg.stop_tol,
                       cfg.proj_tol, config=cfg.document)
    path = csv_path or cfg.csv_path
    if path:
        write_trace(trace, path)
    return trace


# ------------------------------------------------------------------ CSV

def _fmt(v):
    return repr(float(v))


def _header(dim):
    return ["n"] + [f"x{i}" for i in range(dim)] + list(TRACE_FIELDS)


def write_trace(trace, path):
    """Write ``path`` and ``path + '.meta.json'``; output is byte-reproducible."""
    d = trace.dim
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(_header(d))
        for r in trace.rows:
            w.writerow([str(r["n"])] + [_fmt(v) for v in r["x"]]
                       + [_fmt(r[k]) for k in TRACE_FIELDS])
    meta = {
        "scheme": trace.scheme, "dim": d, "p": trace.p,
        "anchor": [float(v) for v in trace.anchor],
        "known_fixed": np.asarray(trace.known_fixed, dtype=float).tolist(),
        "target": None if trace.target is None else [float(v) for v in trace.target],
        "stop_reason": trace.stop_reason,
        "cuts": [[float(v) for v in h.normal] + [h.offset] for h in trace.cuts],
        "config": trace.config,
    }
    with open(path + ".meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=1, sort_keys=True)
        fh.write("\n")


def read_trace(path):
    """Inverse of ``write_trace``."""
    with open(path + ".meta.json", encoding="utf-8") as fh:
        meta = json.load(fh)
    d = meta["dim"]
    trace = RunTrace(meta["scheme"], d, meta["p"], np.asarray(meta["anchor"], dtype=float),
                     np.asarray(meta["known_fixed"], dtype=float).reshape(-1, d),
                     stop_reason=meta["stop_reason"], config=meta["config"])
    if meta.get("target") is not None:
        trace.target = np.asarray(meta["target"], dtype=float)
    trace.cuts = [HalfSpace(np.asarray(c[:-1]), c[-1]) for c in meta["cuts"]]
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    if header != _header(d):
        raise ValueError(f"unexpected CSV header in {path}")
    for raw in rows[1:]:
        vals = dict(zip(header, raw))
        row = {"n": int(vals["n"]), "x": [float(vals[f"x{i}"]) for i in range(d)]}
        row.update({k: float(vals[k]) for k in TRACE_FIELDS})
        trace.rows.append(row)
    return trace


# --------------------------------------------------------------- report

def _entry(value, tol, skipped=False, note=None):
    value = 0.0 if value is None else float(value)
    out = {"passed": True if skipped else bool(value <= tol),
           "slack": max(value, 0.0), "tolerance": tol}
    if skipped:
        out["skipped"] = True
    if note:
        out["note"] = note
    return out


def check_report(trace, known_fixed=None):
    """Evaluate the run invariants on a trace.

    Each entry reports ``passed``, the measured worst violation ``slack``
    (0 when the invariant holds with room to spare) and the tolerance.
    """
    geom = Geometry(trace.dim, trace.p)
    u = trace.known_fixed if known_fixed is None else np.asarray(known_fixed, dtype=float)
    u = np.asarray(u, dtype=float).reshape(-1, trace.dim)
    X = trace.column("x").reshape(-1, trace.dim)
    n = trace.column("n")
    ad = trace.column("anchor_dist")
    tol = TOLERANCES
    inv = {}

    inv["row_count"] = _entry(0.0 if np.all(np.diff(n) == 1) else 1.0, 0.0)

    monotone = trace.scheme in ("nested", "nt")
    drop = float(np.max(ad[:-1] - ad[1:])) if len(ad) > 1 else 0.0
    inv["monotone_anchor_distance"] = _entry(
        drop, tol["monotone_anchor_distance"], skipped=not monotone,
        note=None if monotone else "not implied for the non-nested scheme")

    if len(u):
        bound = float(np.min(norm(geom, trace.anchor - u)))
        inv["anchor_distance_bound"] = _entry(float(np.max(ad)) - bound,
                                              tol["anchor_distance_bound"])
        cut = max((float(np.max(h.value(u))) for h in trace.cuts), default=0.0)
        inv["fixed_point_d_feasibility"] = _entry(cut, tol["fixed_point_d_feasibility"])
        lev = trace.column("fp_level_residual")[1:]
        bnd = trace.column("level_bound")[1:]
        have = ~np.isnan(lev)
        gap = float(np.max(lev[have] - bnd[have])) if np.any(have) else 0.0
        inv["fixed_point_level_condition"] = _entry(
            gap, tol["fixed_point_level_condition"], skipped=not np.any(have))
    else:
        for key in ("anchor_distance_bound", "fixed_point_d_feasibility",
                    "fixed_point_level_condition"):
            inv[key] = _entry(0.0, tol[key], skipped=True, note="no known fixed points")

    last = trace.rows[-1]
    if trace.scheme == "nested":
        res = max(last["res_tn"], last["res_tnm1"]) if len(trace.rows) > 1 else 0.0
        inv["residual_diagnostics"] = _entry(res, tol["residual_diagnostics"])
    else:
        inv["residual_diagnostics"] = _entry(last["res_t"], tol["residual_diagnostics"])

    target = trace.target
    if target is not None:
        err = float(norm(geom, X[-1] - target))
        inv["convergence"] = _entry(err, tol["convergence"])
    elif len(u):
        err = float(np.min(norm(geom, u - X[-1])))
        inv["convergence"] = _entry(err, tol["convergence"],
                                    note="distance to nearest known fixed point")
    else:
        inv["convergence"] = _entry(0.0, tol["convergence"], skipped=True)

    vi = trace.column("vi_residual")[1:]
    vi = vi[~np.isnan(vi)]
    inv["projection_certificate"] = _entry(
        float(-np.min(vi)) if len(vi) else 0.0, tol["projection_certificate"])

    return {"scheme": trace.scheme, "iterations": trace.iterations,
            "stop_reason": trace.stop_reason,
            "passed": all(v["passed"] for v in inv.values()),
            "invariants": inv}


# ---------------------------------------------------------------- sweep

def set_param(doc, path, value):
    """Copy of ``doc`` with the dotted ``path`` set to ``value``."""
    out = copy.deepcopy(doc)
    keys = path.split(".")
    node = out
    for k in keys[:-1]:
        if isinstance(node, list):
            node = node[int(k)]
        else:
            node = node.setdefault(k, {})
    if isinstance(node, list):
        node[int(keys[-1])] = value
    else:
        node[keys[-1]] = value
    return out


def _sweep_member(args):
    doc, csv_path = args
    cfg = parse_config(doc)
    trace = run_experiment(cfg, csv_path)
    return {"csv": csv_path, "iterations": trace.iterations,
            "stop_reason": trace.stop_reason, "final": trace.final.tolist()}


def sweep(doc, param, values, out_dir=".", stem="sweep", jobs=1):
    """Run one experiment per value of ``param``; one CSV per value.

    All members are validated before any runs. With ``jobs > 1`` the runs
    execute in separate processes.
    """
    if isinstance(doc, (str, bytes)):
        doc = json.loads(doc)
    members = []
    for v in values:
        member = set_param(_merge(DEFAULTS, doc), param, v)
        parse_config(member)
        label = json.dumps(v).replace("/", "_").replace(" ", "").strip('"')
        members.append((member, os.path.join(out_dir, f"{stem}_{param}={label}.csv")))
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_sweep_member, members))
    else:
        results = [_sweep_member(m) for m in members]
    for v, r in zip(values, results):
        r["value"] = v
    return results
