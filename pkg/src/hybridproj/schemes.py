"""Hybrid projection iterations as step functions over explicit state.

Three schemes share the same skeleton: build a convex set that provably
contains ``F(T)``, intersect it with a half-space that keeps the anchor's
projection history, and project the anchor ``x`` onto the intersection.

``nested``
    ``C_n = co{z in C_{n-1} : ||z - T^n z|| <= t_n ||x_n - T^n x_n||}`` and
    ``D_n = {z in D_{n-1} : <x_n - z, J(x - x_n)> >= 0}``, starting from
    ``x_1 = x`` and ``C_0 = D_0 = C``. Works for asymptotically nonexpansive
    ``T`` in l^p.
``mt``
    Same construction with ``T`` instead of ``T^n`` and without nesting:
    the level set is taken over all of ``C`` and only the current ``D_n``
    is used.
``nt``
    Euclidean scheme with ``y_n = a_n x_n + (1 - a_n) T x_n``,
    ``C_n = {z : ||z - y_n|| <= ||z - x_n||}`` and
    ``Q_n = {z : <x_n - z, x - x_n> >= 0}``, starting from ``x_0 = x``.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import (DegenerateHalfSpace, GeometryMismatch, HybridProjError,
                     SchemeError)
from .levelset import (LevelSetThreshold, SamplerConfig, build_region, extend_toward,
                       level_residual, sample_level_set)
from .operators import apply_iterate
from .projection import FeasibleRegion, HalfSpace, project
from .space import as_point, duality_map, norm, pairing

__all__ = ["Schedule", "SchemeState", "RunTrace", "make_dn_halfspace", "init_state",
           "step_nested", "step_matsushita_takahashi", "step_nakajo_takahashi",
           "run_scheme", "SCHEMES", "TRACE_FIELDS"]

SCHEMES = ("nested", "mt", "nt")

# per-row observables after the coordinates, in CSV order
TRACE_FIELDS = ("res_t", "res_tn", "res_tnm1", "anchor_dist", "fixed_dist",
                "hull_vertices", "proj_iterations", "vi_residual", "level_bound",
                "fp_level_residual", "fp_d_violation", "fp_hull_slack")


@dataclass(frozen=True)
class Schedule:
    """Parameter sequence ``t_n`` in (0, 1) or ``alpha_n`` in [0, 1).

    Kinds
    -----
    harmonic
        ``c / (n + shift)``, defaults ``c = 1``, ``shift = 1``.
    geometric
        ``c * r**n`` with ``0 < r < 1``, defaults ``c = 1``, ``r = 0.5``.
    constant_alpha
        ``alpha`` for every ``n`` (for the ``nt`` scheme), default 0.5.
    """

    kind: str = "harmonic"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        p = dict(self.params)
        object.__setattr__(self, "params", p)
        if self.kind == "harmonic":
            c, s = p.setdefault("c", 1.0), p.setdefault("shift", 1.0)
            if not (c > 0 and c < 1 + s):
                raise ValueError("harmonic schedule needs 0 < c < 1 + shift")
        elif self.kind == "geometric":
            c, r = p.setdefault("c", 1.0), p.setdefault("r", 0.5)
            if not (0 < r < 1 and c > 0 and c * r < 1):
                raise ValueError("geometric schedule needs 0 < r < 1 and 0 < c*r < 1")
        elif self.kind == "constant_alpha":
            a = p.setdefault("alpha", 0.5)
            if not 0 <= a < 1:
                raise ValueError("alpha must lie in [0, 1)")
        else:
            raise ValueError(f"unknown schedule kind {self.kind!r}")

    def __call__(self, n):
        p = self.params
        if self.kind == "harmonic":
            return p["c"] / (n + p["shift"])
        if self.kind == "geometric":
            return p["c"] * p["r"] ** n
        return p["alpha"]

    def to_dict(self):
        return {"kind": self.kind, "params": dict(self.params)}


@dataclass
class RunTrace:
    """Per-iterate records of one run.

    Row ``k`` describes the iterate ``x_n`` with index ``n`` and the step
    that produced it (step columns are NaN on the initial row). ``cuts``
    collects every half-space the run imposed and ``target`` is
    ``P_F(anchor)`` when the operator knows its fixed set.
    """

    scheme: str
    dim: int
    p: float
    anchor: np.ndarray
    known_fixed: np.ndarray
    rows: list = field(default_factory=list)
    cuts: list = field(default_factory=list)
    stop_reason: str = None
    config: dict = field(default_factory=dict)
    target: np.ndarray = None

    @property
    def iterations(self):
        return len(self.rows) - 1

    @property
    def final(self):
        return np.asarray(self.rows[-1]["x"])

    def column(self, name):
        if name == "x":
            return np.array([r["x"] for r in self.rows])
        return np.array([r[name] for r in self.rows], dtype=float)


@dataclass
class SchemeState:
    """Mutable state of a run; steps advance it in place and return it."""

    scheme: str
    n: int
    anchor: np.ndarray
    current: np.ndarray
    dn_halfspaces: list
    cn_region: FeasibleRegion
    trace: RunTrace


def make_dn_halfspace(geom, xn, anchor):
    """``{z : <z, J(x - x_n)> <= <x_n, J(x - x_n)>}``.

    Raises
    ------
    DegenerateHalfSpace
        When ``J(x - x_n) = 0``, i.e. the constraint is the whole space.
    """
    xn = as_point(geom, xn, "xn")
    anchor = as_point(geom, anchor, "anchor")
    j = duality_map(geom, anchor - xn)
    if not np.any(j):
        raise DegenerateHalfSpace("anchor coincides with the iterate")
    return HalfSpace(j, float(pairing(xn, j)))


def _domain_box(op):
    lo, hi = op.domain.bounds()
    return FeasibleRegion(lo, hi)


def _fixed_diag(op, trace, power, bound, hull_region, cuts):
    u = trace.known_fixed
    out = {"fp_level_residual": math.nan, "fp_d_violation": math.nan,
           "fp_hull_slack": math.nan}
    if len(u) == 0:
        return out
    if power is not None:
        out["fp_level_residual"] = float(np.max(level_residual(op, power, u)))
    viol = [h.value(u) for h in cuts]
    out["fp_d_violation"] = float(np.max(viol)) if viol else 0.0
    if hull_region is not None and hull_region.has_hull:
        out["fp_hull_slack"] = float(np.max(hull_region.hull.violation(u)))
    return out


def _row(geom, op, trace, n, x, **extra):
    x = np.asarray(x, dtype=float)
    tx = apply_iterate(op, 1, x)
    row = {"n": int(n), "x": x.tolist(),
           "res_t": float(norm(geom, x - tx)),
           "res_tn": float(level_residual(op, n, x[None, :])[0]) if n >= 1 else 0.0,
           "res_tnm1": float(level_residual(op, n - 1, x[None, :])[0]) if n >= 2 else 0.0,
           "anchor_dist": float(norm(geom, trace.anchor - x)),
           "fixed_dist": op.distance_to_fixed(x)}
    for key in TRACE_FIELDS:
        row.setdefault(key, math.nan)
    row.update(extra)
    return row


def init_state(geom, op, anchor, scheme="nested", config=None):
    """Initial state ``x_1 = x`` (``x_0 = x`` for ``nt``) with its trace row."""
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    if op.geom != geom:
        raise GeometryMismatch("operator and run geometries differ")
    if scheme == "nt" and not geom.euclidean:
        raise GeometryMismatch("the nt scheme requires p = 2")
    if scheme in ("mt", "nt") and not op.nonexpansive:
        raise ValueError(f"the {scheme} scheme needs a nonexpansive operator")
    anchor = as_point(geom, anchor, "anchor")
    n0 = 0 if scheme == "nt" else 1
    trace = RunTrace(scheme, geom.dim, geom.p, anchor.copy(),
                     np.asarray(op.known_fixed_points, dtype=float).reshape(-1, geom.dim),
                     config=dict(config or {}))
    target = op.fixed_set_projection(anchor)
    if target is not None:
        trace.target = np.asarray(target, dtype=float)
    trace.rows.append(_row(geom, op, trace, n0, anchor))
    return SchemeState(scheme, n0, anchor.copy(), anchor.copy(), [], _domain_box(op), trace)


def _hybrid_step(geom, op, state, t_sched, sampler, tol, nested):
    n = state.n
    power = n if nested else 1
    xn = state.current
    rn = float(level_residual(op, power, xn[None, :])[0])
    thr = LevelSetThreshold(t_sched(n), rn)
    prev = state.cn_region if nested else _domain_box(op)
    cands = [xn[None, :]]
    if prev.has_hull:
        cands.append(prev.hull_vertices)
    pts = sample_level_set(geom, prev, op, power, thr, sampler,
                           candidates=np.vstack(cands))
    cn = build_region(geom, pts, (), sampler, prev.lower, prev.upper)
    try:
        dn = make_dn_halfspace(geom, xn, state.anchor)
    except DegenerateHalfSpace:
        dn = None
    state.dn_halfspaces.append(dn)
    if dn is not None:
        state.trace.cuts.append(dn)
    active = [h for h in state.dn_halfspaces if h is not None] if nested else \
        ([dn] if dn is not None else [])
    res = project(geom, cn.with_halfspaces(active), state.anchor, tol=tol, seed=n)
    cn, res = _refine(geom, op, power, thr, sampler, prev, cn, active, state.anchor, res,
                      tol, n)
    diag = _fixed_diag(op, state.trace, power, thr.bound, cn, active)
    state.n = n + 1
    state.current = res.point
    state.cn_region = cn
    state.trace.rows.append(_row(
        geom, op, state.trace, state.n, res.point, hull_vertices=len(cn.hull_vertices),
        proj_iterations=res.iterations, vi_residual=res.vi_residual,
        level_bound=thr.bound, **diag))
    return state


def _refine(geom, op, power, thr, sampler, prev, cn, active, anchor, res, tol, n):
    """Grow the sampled hull where the projection presses against it.

    The hull of samples is an inner approximation of the convex hull of the
    level set, and its error matters only where the projection lands. Rays
    from the projected point toward the anchor find members the samples
    missed; the anchor is projected again until the point stops moving.
    """
    for k in range(sampler.refine_rounds):
        near = cn.hull_vertices[np.argsort(
            np.linalg.norm(cn.hull_vertices - res.point, axis=1))[:geom.dim]]
        extra = extend_toward(geom, prev, op, power, thr, sampler, res.point, anchor,
                              origins=near, round_index=k)
        if not len(extra):
            break
        grown = build_region(geom, np.vstack([cn.hull_vertices, extra]), (), sampler,
                             prev.lower, prev.upper, keep=extra)
        if grown.hull_vertices.shape == cn.hull_vertices.shape and \
                np.array_equal(grown.hull_vertices, cn.hull_vertices):
            break
        again = project(geom, grown.with_halfspaces(active), anchor, tol=tol, seed=n)
        moved = float(norm(geom, again.point - res.point))
        cn, res = grown, again
        if moved <= tol * (1.0 + float(norm(geom, anchor))):
            break
    return cn, res


def step_nested(geom, op, state, t_sched, sampler, tol=1e-8):
    """One iteration of the nested scheme; returns the advanced state."""
    return _hybrid_step(geom, op, state, t_sched, sampler, tol, nested=True)


def step_matsushita_takahashi(geom, op, state, t_sched, sampler, tol=1e-8):
    """One iteration of the non-nested scheme built from ``T`` alone."""
    return _hybrid_step(geom, op, state, t_sched, sampler, tol, nested=False)


def step_nakajo_takahashi(geom, op, state, alpha_sched, tol=1e-8):
    """One iteration of the Euclidean scheme.

    Raises
    ------
    GeometryMismatch
        If ``p != 2``.
    """
    if not geom.euclidean:
        raise GeometryMismatch("the nt scheme requires p = 2")
    n, xn, x = state.n, state.current, state.anchor
    a = alpha_sched(n)
    yn = a * xn + (1 - a) * apply_iterate(op, 1, xn)
    cuts = []
    if np.any(xn != yn):
        cuts.append(HalfSpace(2 * (xn - yn), float(xn @ xn - yn @ yn)))
    if np.any(x != xn):
        cuts.append(HalfSpace(x - xn, float(xn @ (x - xn))))
    state.trace.cuts.extend(cuts)
    state.dn_halfspaces.append(cuts[-1] if np.any(x != xn) else None)
    region = _domain_box(op).with_halfspaces(cuts)
    res = project(geom, region, x, tol=tol, seed=n)
    diag = _fixed_diag(op, state.trace, None, math.nan, None, cuts)
    state.n = n + 1
    state.current = res.point
    state.trace.rows.append(_row(
        geom, op, state.trace, state.n, res.point, hull_vertices=0,
        proj_iterations=res.iterations, vi_residual=res.vi_residual, **diag))
    return state


def run_scheme(geom, op, anchor, scheme="nested", t_schedule=None, alpha_schedule=None,
               sampler=None, max_iter=500, stop_tol=1e-6, proj_tol=1e-8, config=None):
    """Iterate until ``||x_n - T x_n|| <= stop_tol`` or ``max_iter`` steps.

    Returns
    -------
    RunTrace
        With ``stop_reason`` set to ``"residual"`` or ``"max_iter"``.

    Raises
    ------
    SchemeError
        Wrapping the failure of a step; ``iteration`` is the step index
        ``n``, ``cause`` the original error and ``trace`` the partial trace.
    """
    if max_iter < 0 or not stop_tol > 0 or not proj_tol > 0:
        raise ValueError("max_iter must be >= 0 and tolerances positive")
    t_schedule = Schedule("harmonic") if t_schedule is None else t_schedule
    alpha_schedule = Schedule("constant_alpha") if alpha_schedule is None else alpha_schedule
    sampler = SamplerConfig() if sampler is None else sampler
    state = init_state(geom, op, anchor, scheme, config)
    trace = state.trace
    for _ in range(max_iter + 1):
        if trace.rows[-1]["res_t"] <= stop_tol:
            trace.stop_reason = "residual"
            break
        if trace.iterations == max_iter:
            trace.stop_reason = "max_iter"
            break
        try:
            if scheme == "nested":
                step_nested(geom, op, state, t_schedule, sampler, proj_tol)
            elif scheme == "mt":
                step_matsushita_takahashi(geom, op, state, t_schedule, sampler, proj_tol)
            else:
                step_nakajo_takahashi(geom, op, state, alpha_schedule, proj_tol)
        except HybridProjError as exc:
            err = SchemeError(f"{scheme} step n={state.n} failed: {exc}", state.n, exc)
            err.trace = trace
            raise err from exc
    return trace
