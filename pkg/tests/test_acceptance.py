"""Acceptance criteria at their stated tolerances.

Each test appends one ``PASS``/``FAIL`` line to ``ACCEPTANCE_LINES``; the
lines are echoed in the pytest terminal summary. Run directly with
``python tests/test_acceptance.py`` for the same output.
"""

import functools
import math
import sys
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, random_region
from hybridproj.levelset import SamplerConfig
from hybridproj.operators import (composite, contraction_scale, empirical_lipschitz,
                                  gk_truncated, identity, projection_onto_box, rotation)
from hybridproj.projection import euclidean_oracle, project
from hybridproj.schemes import Schedule, run_scheme
from hybridproj.space import Geometry, duality_map, dual_norm, norm, pairing


def record(number, title, passed, detail):
    line = f"[{'PASS' if passed else 'FAIL'}] {number}. {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.start


# ------------------------------------------------------------ shared runs

@functools.lru_cache(maxsize=None)
def nt_rotation_run():
    g = Geometry(2, 2)
    with Timer() as t:
        trace = run_scheme(g, rotation(g, 1.0), [1.0, 1.0], "nt",
                           alpha_schedule=Schedule("constant_alpha", {"alpha": 0.5}),
                           max_iter=200, stop_tol=1e-300)
    return trace, t.seconds


@functools.lru_cache(maxsize=None)
def contraction_run(p, scheme="nested"):
    # stop_tol is tiny so the run reaches N = 50 rather than stopping early
    g = Geometry(2, p)
    with Timer() as t:
        trace = run_scheme(g, contraction_scale(g, 0.5), [1.0, 1.0], scheme,
                           t_schedule=Schedule("harmonic"),
                           sampler=SamplerConfig(samples_per_round=2000),
                           max_iter=49, stop_tol=1e-300)
    return trace, t.seconds


@functools.lru_cache(maxsize=None)
def gk_run():
    g = Geometry(3, 2)
    with Timer() as t:
        trace = run_scheme(g, gk_truncated(g), [0.9, 0.1, 0.1], "nested",
                           t_schedule=Schedule("harmonic"), max_iter=29, stop_tol=1e-300)
    return trace, t.seconds


def nested_runs():
    return {"contraction p=2": contraction_run(2.0)[0],
            "contraction p=3": contraction_run(3.0)[0],
            "gk_truncated d=3": gk_run()[0]}


def fixed_point_runs():
    runs = nested_runs()
    runs["mt contraction p=2"] = contraction_run(2.0, "mt")[0]
    runs["nt rotation"] = nt_rotation_run()[0]
    return runs


# -------------------------------------------------------------- criteria

def test_1_duality_identities():
    rng = np.random.default_rng(1)
    worst_pair = worst_norm = 0.0
    with Timer() as t:
        for p in (1.5, 2.0, 3.0, 4.0):
            for d in (1, 2, 3, 8):
                g = Geometry(d, p)
                x = rng.normal(size=(10_000, d)) * 10.0 ** rng.uniform(-3, 3, (10_000, 1))
                j = duality_map(g, x)
                nx = norm(g, x)
                worst_pair = max(worst_pair, np.max(np.abs(pairing(x, j) - nx ** 2) / nx ** 2))
                worst_norm = max(worst_norm, np.max(np.abs(dual_norm(g, j) - nx) / nx))
    ok = worst_pair <= 1e-9 and worst_norm <= 1e-9 and t.seconds < 1.0
    assert record(1, "duality map identities", ok,
                  f"max rel err <x,Jx> {worst_pair:.1e}, ||Jx||_q {worst_norm:.1e}"
                  f" (tol 1e-9), {t.seconds:.2f}s (limit 1s)")


def test_2_projection_correctness():
    rng = np.random.default_rng(2)
    worst_vi, worst_idem, worst_oracle = math.inf, 0.0, 0.0
    with Timer() as t:
        for k in range(100):
            reg = random_region(rng, dim=2 + k % 3)
            p = (2.0, 3.0)[k % 2]
            g = Geometry(reg.dim, p)
            a = rng.uniform(-3, 3, reg.dim)
            r = project(g, reg, a)
            worst_vi = min(worst_vi, r.vi_residual)
            again = project(g, reg, r.point)
            worst_idem = max(worst_idem, float(np.linalg.norm(again.point - r.point)))
            if p == 2.0:
                err = np.linalg.norm(r.point - euclidean_oracle(reg, a))
                worst_oracle = max(worst_oracle, float(err))
    ok = worst_vi >= -1e-7 and worst_idem <= 1e-8 and worst_oracle <= 1e-6 and t.seconds < 30
    assert record(2, "projection correctness", ok,
                  f"min VI {worst_vi:.1e} (>= -1e-7), idempotence {worst_idem:.1e} (1e-8),"
                  f" oracle gap {worst_oracle:.1e} (1e-6), {t.seconds:.1f}s (limit 30s)")


EXACT_NT = ("exact-arithmetic recomputation (mpmath, 60 and 120 digits) gives "
            "min ||x_n|| = 1.224e-3 over n <= 200; the 1e-3 level is first reached "
            "at n = 243, so the hitting-time clause cannot hold")


def test_3_nt_rotation_anchor_distance():
    trace, seconds = nt_rotation_run()
    ad = trace.column("anchor_dist")
    drop = float(np.max(ad[:-1] - ad[1:]))
    excess = float(ad.max() - math.sqrt(2.0))
    ok = drop <= 1e-9 and excess <= 1e-8 and seconds < 5
    assert record("3a", "NT rotation anchor distances", ok,
                  f"max decrease {max(drop, 0):.1e} (1e-9), max excess over ||anchor||"
                  f" {excess:.1e} (1e-8), {seconds:.2f}s (limit 5s)")


def exact_nt_rotation(steps, digits=60):
    """NT iterates for the 1 rad rotation with alpha = 1/2 in mpmath.

    The projection onto two half-planes is done in closed form: the anchor
    if feasible, else the feasible one of the two single-plane projections,
    else the corner.
    """
    import mpmath as mp

    with mp.workdps(digits):
        c, s = mp.cos(1), mp.sin(1)
        x = mp.matrix([1, 1])
        xn = x.copy()

        def dot(a, b):
            return a[0] * b[0] + a[1] * b[1]

        out = [xn]
        for _ in range(steps):
            tx = mp.matrix([c * xn[0] - s * xn[1], s * xn[0] + c * xn[1]])
            yn = (xn + tx) / 2
            cuts = [(2 * (xn - yn), dot(xn, xn) - dot(yn, yn))]
            if x != xn:
                cuts.append((x - xn, dot(xn, x - xn)))

            def feasible(z):
                return all(dot(a, z) - b <= mp.mpf(10) ** (-digits + 10) for a, b in cuts)

            if feasible(x):
                nxt = x
            else:
                nxt = None
                for a, b in cuts:
                    z = x - (dot(a, x) - b) / dot(a, a) * a
                    if feasible(z) and (nxt is None or mp.norm(z - x) < mp.norm(nxt - x)):
                        nxt = z
                if nxt is None:
                    (a1, b1), (a2, b2) = cuts
                    det = a1[0] * a2[1] - a1[1] * a2[0]
                    nxt = mp.matrix([(b1 * a2[1] - b2 * a1[1]) / det,
                                     (a1[0] * b2 - a2[0] * b1) / det])
            xn = nxt
            out.append(xn)
        return [float(mp.norm(v)) for v in out], [[float(v[0]), float(v[1])] for v in out]


def test_3_exact_oracle_misses_1e3_within_200():
    pytest.importorskip("mpmath")
    norms60, pts60 = exact_nt_rotation(200, 60)
    norms120, _ = exact_nt_rotation(200, 120)
    assert np.allclose(norms60, norms120, rtol=1e-12)
    assert min(norms60) > 1e-3
    assert min(norms60) == pytest.approx(1.224e-3, rel=1e-3)
    # the float run follows the exact sequence until roundoff is amplified
    trace, _ = nt_rotation_run()
    assert np.allclose(trace.column("x")[:15], pts60[:15], atol=1e-9)


@pytest.mark.xfail(strict=True, reason=EXACT_NT)
def test_3_nt_rotation_reaches_1e3_within_200():
    trace, _ = nt_rotation_run()
    norms = np.linalg.norm(trace.column("x"), axis=1)
    hit = np.flatnonzero(norms <= 1e-3)
    ok = len(hit) > 0
    detail = (f"first n with ||x_n|| <= 1e-3: {int(trace.column('n')[hit[0]])}" if ok else
              f"min ||x_n|| over n <= 200 is {norms.min():.3e} (needs 1e-3); {EXACT_NT}")
    assert record("3b", "NT rotation ||x_n|| <= 1e-3 within 200 iterations", ok, detail)


@pytest.mark.parametrize("p", [2.0, 3.0])
def test_4_nested_contraction(p):
    trace, seconds = contraction_run(p)
    n_last = int(trace.column("n")[-1])
    dist = float(norm(Geometry(2, p), trace.final))
    ok = n_last == 50 and dist <= 1e-2 and seconds < 60
    assert record(4, f"nested contraction p={p:g}", ok,
                  f"dist(x_{n_last}, 0) = {dist:.1e} (1e-2), {seconds:.1f}s (limit 60s)")


def test_5_nested_gk_truncated():
    trace, seconds = gk_run()
    g = Geometry(3, 2)
    n = trace.column("n")
    final = float(norm(g, trace.final))
    shift_res = float(trace.column("res_tnm1")[n == 30][0])
    ok = final <= 1e-2 and shift_res <= 1e-2 and seconds < 60
    assert record(5, "nested gk_truncated", ok,
                  f"dist(x_30, 0) = {final:.1e} (1e-2), ||x_30 - T^29 x_30|| = {shift_res:.1e}"
                  f" (1e-2), {seconds:.1f}s (limit 60s)")


def test_6_fixed_point_feasibility():
    worst_d, level_violations, checked = 0.0, 0, 0
    for name, trace in fixed_point_runs().items():
        u = trace.known_fixed
        for h in trace.cuts:
            worst_d = max(worst_d, float(np.max(h.value(u))))
        lev = trace.column("fp_level_residual")[1:]
        bnd = trace.column("level_bound")[1:]
        have = ~np.isnan(lev)
        level_violations += int(np.sum(lev[have] > bnd[have]))
        checked += len(trace.cuts)
    ok = worst_d <= 1e-8 and level_violations == 0
    assert record(6, "fixed points stay feasible", ok,
                  f"max D violation {worst_d:.1e} over {checked} cuts (1e-8),"
                  f" level-condition violations {level_violations} (0)")


def test_7_monotone_anchor_distance():
    worst_drop, worst_excess = -math.inf, -math.inf
    for name, trace in nested_runs().items():
        g = Geometry(trace.dim, trace.p)
        ad = trace.column("anchor_dist")
        worst_drop = max(worst_drop, float(np.max(ad[:-1] - ad[1:])))
        bound = float(np.min(norm(g, trace.anchor - trace.known_fixed)))
        worst_excess = max(worst_excess, float(ad.max() - bound))
    ok = worst_drop <= 1e-9 and worst_excess <= 1e-7
    assert record(7, "monotone anchor distance (nested runs)", ok,
                  f"max decrease {max(worst_drop, 0):.1e} (1e-9),"
                  f" max excess over ||x - u|| {worst_excess:.1e} (1e-7)")


def test_8_scheme_agreement():
    nested = contraction_run(2.0)[0].final
    mt = contraction_run(2.0, "mt")[0].final
    gap = float(np.linalg.norm(nested - mt))
    assert record(8, "mt vs nested limits", gap <= 2e-2, f"||x_nested - x_mt|| = {gap:.1e} (2e-2)")


def builtin_operators():
    g2, g3 = Geometry(2, 2), Geometry(2, 3)
    return {
        "contraction p=2": contraction_scale(g2, 0.5),
        "contraction p=3 lam=-0.8": contraction_scale(g3, -0.8),
        "identity p=3": identity(g3),
        "rotation p=2": rotation(g2, 1.0),
        "rotation p=3 quarter": rotation(g3, math.pi / 2),
        "gk d=3 p=2": gk_truncated(Geometry(3, 2)),
        "gk d=4 p=3": gk_truncated(Geometry(4, 3)),
        "gk d=6 p=1.5": gk_truncated(Geometry(6, 1.5)),
        "box clamp p=3": projection_onto_box(g3, [-0.5, -0.2], [0.5, 0.3]),
        "composite p=2": composite([contraction_scale(g2, 0.5),
                                    projection_onto_box(g2, [-0.5, -0.5], [0.5, 0.5])]),
    }


def test_9_operator_certification():
    worst, where = -math.inf, None
    for name, op in builtin_operators().items():
        for n in range(1, 11):
            gap = empirical_lipschitz(op, n, pairs=1000, seed=n) - op.kn(n)
            if gap > worst:
                worst, where = gap, f"{name}, n={n}"
    assert record(9, "operator certification", worst <= 1e-6,
                  f"max(empirical - k_n) = {worst:.1e} at {where} (1e-6)")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-rx"]))
