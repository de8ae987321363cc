"""Metric projection in l^p onto polyhedral regions.

A region is ``box ∩ conv(hull_vertices) ∩ {a_i . z <= b_i}``. The projection
``P(x) = argmin ||y - x||_p`` over the region is computed in the reduced
coordinates of the hull's affine frame, where the region is a polytope in
facet form, by a primal-dual interior point method followed by an active-set
Newton polish. Optimality is certified through the variational inequality

    <u - y, J(x - u)> >= 0   for all y in the region.

``euclidean_oracle`` is an independent route for ``p = 2`` (brute-force
facet enumeration plus least-distance programming) used to cross-check the
solver.
"""

from dataclasses import dataclass, field
from functools import cached_property
import itertools

import numpy as np
from scipy.linalg import qr
from scipy.optimize import linprog, lsq_linear

from .errors import InfeasibleRegion, NonConvergence
from .hull import HullIndex
from .space import as_point, duality_map, norm

__all__ = ["HalfSpace", "FeasibleRegion", "ProjectionResult", "project",
           "euclidean_oracle", "vi_certificate", "sample_region"]

INFEASIBILITY_THRESHOLD = 1e-6


@dataclass(frozen=True)
class HalfSpace:
    """The set ``{z : <normal, z> <= offset}``."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        a = np.asarray(self.normal, dtype=float)
        if a.ndim != 1 or not np.all(np.isfinite(a)) or not np.isfinite(self.offset):
            raise ValueError("half-space needs a finite 1-d normal and offset")
        if not np.any(a):
            raise ValueError("half-space normal must be nonzero")
        object.__setattr__(self, "normal", a)
        object.__setattr__(self, "offset", float(self.offset))

    def value(self, z):
        """Signed violation ``<a, z> - b`` scaled to Euclidean distance."""
        z = np.asarray(z, dtype=float)
        return (z @ self.normal - self.offset) / np.linalg.norm(self.normal)

    def contains(self, z, tol=0.0):
        return self.value(z) <= tol


@dataclass
class FeasibleRegion:
    """``box ∩ conv(hull_vertices) ∩ halfspaces``.

    An empty ``hull_vertices`` array means there is no hull constraint. The
    box stands for the ambient set and may have infinite bounds.
    """

    lower: np.ndarray
    upper: np.ndarray
    hull_vertices: np.ndarray = None
    halfspaces: list = field(default_factory=list)

    def __post_init__(self):
        self.lower = np.asarray(self.lower, dtype=float).ravel()
        self.upper = np.asarray(self.upper, dtype=float).ravel()
        d = self.lower.size
        if self.upper.size != d or d == 0:
            raise ValueError("box bounds must be nonempty and of equal length")
        if np.any(self.lower > self.upper) or np.any(np.isnan(self.lower)) or np.any(np.isnan(self.upper)):
            raise ValueError("box must satisfy lower <= upper componentwise")
        if self.hull_vertices is None:
            self.hull_vertices = np.zeros((0, d))
        self.hull_vertices = np.asarray(self.hull_vertices, dtype=float).reshape(-1, d)
        if not np.all(np.isfinite(self.hull_vertices)):
            raise ValueError("hull vertices must be finite")
        self.halfspaces = list(self.halfspaces)
        for h in self.halfspaces:
            if h.normal.size != d:
                raise ValueError("half-space dimension does not match the box")

    @classmethod
    def box(cls, lower, upper, dim=None, **kwargs):
        if dim is not None:
            lower = np.full(dim, lower, dtype=float) if np.ndim(lower) == 0 else lower
            upper = np.full(dim, upper, dtype=float) if np.ndim(upper) == 0 else upper
        return cls(lower, upper, **kwargs)

    @property
    def dim(self):
        return self.lower.size

    @property
    def has_hull(self):
        return self.hull_vertices.shape[0] > 0

    @cached_property
    def hull(self):
        return HullIndex(self.hull_vertices) if self.has_hull else None

    def with_halfspaces(self, halfspaces):
        return FeasibleRegion(self.lower, self.upper, self.hull_vertices,
                              list(self.halfspaces) + list(halfspaces))

    def bounding_box(self):
        """Tightest axis box known without solving anything."""
        lo, hi = self.lower.copy(), self.upper.copy()
        if self.has_hull:
            lo = np.maximum(lo, self.hull_vertices.min(axis=0))
            hi = np.minimum(hi, self.hull_vertices.max(axis=0))
        return lo, hi

    def _scale(self):
        if self.has_hull:
            return min(self.hull.scale, 1.0)
        return 1.0

    def violation(self, z):
        """Largest constraint violation per row of ``z`` (0 when feasible)."""
        z = np.atleast_2d(np.asarray(z, dtype=float))
        v = np.zeros(z.shape[0])
        v = np.maximum(v, np.max(self.lower - z, axis=1))
        v = np.maximum(v, np.max(z - self.upper, axis=1))
        for h in self.halfspaces:
            v = np.maximum(v, h.value(z))
        if self.has_hull:
            v = np.maximum(v, self.hull.violation(z))
        return v

    def contains(self, z, tol=1e-10):
        """Row-wise membership within ``tol`` (relative for tiny hulls)."""
        z = np.atleast_2d(np.asarray(z, dtype=float))
        roundoff = 4 * np.finfo(float).eps * (1.0 + np.max(np.abs(z), axis=1))
        return self.violation(z) <= tol * self._scale() + roundoff

    def constraints(self, frame):
        """All inequalities in the reduced coordinates of ``frame``.

        ``frame`` maps ``y = center + eta @ basis.T``; returns ``G eta <= h``
        with unit-norm rows.
        """
        c, B = frame
        rows, rhs = [], []
        d = self.dim
        eye = np.eye(d)
        for i in range(d):
            if np.isfinite(self.upper[i]):
                rows.append(eye[i]); rhs.append(self.upper[i])
            if np.isfinite(self.lower[i]):
                rows.append(-eye[i]); rhs.append(-self.lower[i])
        for h in self.halfspaces:
            rows.append(h.normal); rhs.append(h.offset)
        if rows:
            A = np.array(rows)
            b = np.array(rhs) - A @ c
            G = A @ B
        else:
            G, b = np.zeros((0, B.shape[1])), np.zeros(0)
        if self.has_hull and self.hull.rank > 0:
            G = np.vstack([G, self.hull.normals])
            b = np.concatenate([b, self.hull.offsets])
        # rows orthogonal to the affine hull are either trivially satisfied
        # or make the region empty
        nrm = np.linalg.norm(G, axis=1)
        flat = nrm <= 1e-14 * max(1.0, np.max(nrm, initial=0.0))
        if np.any(b[flat] < -1e-12 * (1.0 + np.abs(b[flat]))):
            raise InfeasibleRegion("region misses the affine hull of its vertices",
                                   violation=float(-b[flat].min()))
        G, b, nrm = G[~flat], b[~flat], nrm[~flat]
        return G / nrm[:, None], b / nrm

    def frame(self):
        """Affine frame ``(center, basis)`` of the search space."""
        if self.has_hull:
            return self.hull.center, self.hull.basis
        return np.zeros(self.dim), np.eye(self.dim)


@dataclass
class ProjectionResult:
    point: np.ndarray
    weights: np.ndarray
    vi_residual: float
    iterations: int
    polished: bool = False


# ---------------------------------------------------------------- objective

class _Objective:
    """``(1/p)||c + S*B xi - a||_p^p`` normalized to unit gradient scale."""

    def __init__(self, p, c, B, S, anchor):
        self.p = p
        self.B = B * S
        self.r0 = c - anchor
        D = np.max(np.abs(self.r0)) + S
        self.D = D
        self.norm = S * D ** (p - 1.0)
        self.floor = 1e-12 * D

    def residual(self, xi):
        return self.r0 + self.B @ xi

    def value(self, xi):
        r = self.residual(xi)
        return np.sum((np.abs(r) / self.D) ** self.p) * self.D ** self.p / self.p / self.norm

    def grad(self, xi):
        r = self.residual(xi)
        return self.B.T @ (np.abs(r) ** (self.p - 1.0) * np.sign(r)) / self.norm

    def hess(self, xi):
        r = np.abs(self.residual(xi))
        if self.p < 2.0:
            r = np.maximum(r, self.floor)
        # for p < 2 use the majorizing curvature |r|^(p-2) instead of
        # (p-1)|r|^(p-2): Newton on |r|^p overshoots there
        w = max(self.p - 1.0, 1.0) * r ** (self.p - 2.0) / self.norm
        return (self.B.T * w) @ self.B


def _phase_one(G, h):
    """Minimize the largest violation of ``G x <= h`` with an LP."""
    m, k = G.shape
    cost = np.zeros(k + 1)
    cost[-1] = 1.0
    A = np.hstack([G, -np.ones((m, 1))])
    bounds = [(None, None)] * k + [(0, None)]
    res = linprog(cost, A_ub=A, b_ub=h, bounds=bounds, method="highs")
    if res.status != 0:
        raise InfeasibleRegion(f"phase-1 LP failed: {res.message}")
    return res.x[:k], float(res.x[-1])


_TINY = 1e-280


def _ipm(obj, G, h, x0, eps, max_iter, sigma=0.1):
    """Primal-dual path following for ``min f(x) s.t. G x <= h``.

    Fixed centering ``sigma``; Mehrotra's corrector oscillated on
    degenerate hull facets.
    """
    m, k = G.shape
    x = x0.copy()
    s = np.maximum(h - G @ x, 1e-2)
    lam = np.ones(m)
    it = 0
    for it in range(1, max_iter + 1):
        g = obj.grad(x)
        H = obj.hess(x)
        rd = g + G.T @ lam
        rp = G @ x + s - h
        mu = s @ lam / m
        # for p < 2 the gradient ~ |r|^(p-1) is a poor stationarity measure;
        # leave the last digits to the active-set polish
        dual_ok = obj.p < 2.0 or np.max(np.abs(rd)) <= eps
        if dual_ok and max(np.max(np.abs(rp)), mu) <= eps:
            return x, s, lam, it, True
        W = lam / s
        M = H + (G.T * W) @ G

        def solve(rc):
            rhs = -rd - G.T @ (W * rp - rc / s)
            try:
                dx = np.linalg.solve(M, rhs)
            except np.linalg.LinAlgError:
                dx = np.linalg.lstsq(M, rhs, rcond=None)[0]
            dlam = W * (G @ dx + rp) - rc / s
            ds = -(rc + s * dlam) / lam
            return dx, ds, dlam

        def max_step(ds, dlam):
            a = 1.0
            neg = ds < 0
            if np.any(neg):
                a = min(a, np.min(-s[neg] / ds[neg]))
            neg = dlam < 0
            if np.any(neg):
                a = min(a, np.min(-lam[neg] / dlam[neg]))
            return a

        try:
            dx, ds, dlam = solve(s * lam - sigma * mu)
        except np.linalg.LinAlgError:
            break
        a = min(1.0, 0.995 * max_step(ds, dlam))
        xn, sn, ln = x + a * dx, s + a * ds, lam + a * dlam
        moved = a * np.max(np.abs(dx))
        x, s, lam = xn, np.maximum(sn, _TINY), np.maximum(ln, _TINY)
        if moved <= 1e-15 and mu <= eps and np.max(np.abs(rp)) <= eps:
            return x, s, lam, it, True
    return x, s, lam, it, False


def _polish(obj, G, h, x, s, lam, newton_steps=100):
    """Solve the KKT equalities on the identified active set."""
    active = lam > s
    if not np.any(active):
        active = np.zeros(G.shape[0], dtype=bool)
    Ga, ha = G[active], h[active]
    if Ga.shape[0] > 1:
        _, r, piv = qr(Ga.T, pivoting=True, mode="economic")
        rank = int(np.sum(np.abs(np.diag(r)) > 1e-10 * abs(r[0, 0])))
        keep = np.sort(piv[:rank])
        Ga, ha = Ga[keep], ha[keep]
    na, k = Ga.shape
    y = x.copy()
    mult = np.zeros(na)

    def residual(y, mult):
        return np.concatenate([obj.grad(y) + Ga.T @ mult, Ga @ y - ha])

    res = residual(y, mult)
    for _ in range(newton_steps):
        H = obj.hess(y)
        K = np.block([[H, Ga.T], [Ga, np.zeros((na, na))]])
        try:
            step = np.linalg.solve(K, -res)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(K, -res, rcond=1e-13)[0]
        a, base = 1.0, np.linalg.norm(res)
        for _ in range(40):
            yn, mn = y + a * step[:k], mult + a * step[k:]
            rn = residual(yn, mn)
            if np.linalg.norm(rn) < base or a < 1e-10:
                break
            a *= 0.5
        moved = a * np.max(np.abs(step[:k]))
        y, mult, res = yn, mn, rn
        if moved <= 1e-15 * (1.0 + np.max(np.abs(y))) or np.linalg.norm(res) == 0.0:
            settled = True
            break
    else:
        settled = False
    if G.shape[0] and np.max(G @ y - h) > 1e-12:
        return None
    if na and np.min(mult) < -1e-9:
        return None
    stat = obj.grad(y) + Ga.T @ mult
    if np.max(np.abs(stat), initial=0.0) > 1e-9 and not settled:
        return None
    return y


def _nnls(A, b):
    # scipy's nnls returned non-stationary points on small LDP instances;
    # bounded-variable least squares is an exact active-set method
    res = lsq_linear(A, b, bounds=(0.0, np.inf), method="bvls", tol=1e-15)
    return res.x


def _snap(region, point, anchor, scale):
    # J(anchor - u) has components |r_i|^(p-1), which for p < 2 turns
    # roundoff-sized r_i into visible certificate errors
    close = np.abs(point - anchor) <= 1e-13 * scale
    if not np.any(close):
        return point
    snapped = np.where(close, anchor, point)
    before = region.violation(point)[0]
    if region.violation(snapped)[0] <= max(before, 0.0):
        return snapped
    return point


def _hull_weights(region, y):
    V = region.hull_vertices
    hull = region.hull
    S = max(hull.scale, np.finfo(float).tiny)
    A = np.vstack([((V - hull.center) / S).T, np.ones(V.shape[0])])
    b = np.concatenate([(y - hull.center) / S, [1.0]])
    w = np.maximum(_nnls(A, b), 0.0)
    total = w.sum()
    if total <= 0:
        w = np.full(V.shape[0], 1.0 / V.shape[0])
    else:
        w = w / total
    return w


def project(geom, region, anchor, tol=1e-8, max_iter=500, certificate_samples=64,
            seed=0):
    """Metric projection of ``anchor`` onto ``region`` in the l^p norm.

    Parameters
    ----------
    geom : Geometry
    region : FeasibleRegion
    anchor : array_like (d,)
    tol : float
        Feasibility tolerance; the returned point violates no constraint by
        more than ``tol`` and the certificate is checked against ``-tol``.
    max_iter : int
        Interior-point iteration budget.

    Returns
    -------
    ProjectionResult

    Raises
    ------
    InfeasibleRegion
        If the smallest achievable constraint violation exceeds 1e-6.
    NonConvergence
        If the interior-point method stalls and the polish fails.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    anchor = as_point(geom, anchor, "anchor")
    if region.dim != geom.dim:
        raise ValueError("region and geometry dimensions differ")
    c, B = region.frame()
    k = B.shape[1]
    G, h = region.constraints((c, B))

    if k == 0:
        if G.shape[0] and np.max(-h) > INFEASIBILITY_THRESHOLD:
            raise InfeasibleRegion("single-point hull violates the constraints",
                                   violation=float(np.max(-h)))
        return _result(geom, region, anchor, c.copy(), 0, tol, certificate_samples,
                       seed, polished=True)

    if region.has_hull:
        S = max(region.hull.scale, np.finfo(float).tiny)
    else:
        lo, hi = region.lower, region.upper
        finite = np.concatenate([lo[np.isfinite(lo)], hi[np.isfinite(hi)], anchor])
        S = max(np.max(np.abs(finite)), 1.0)
    G_s, h_s = G, h / S  # xi = eta / S; rows of G are unit norm
    obj = _Objective(geom.p, c, B, S, anchor)

    if G_s.shape[0] == 0:
        return _result(geom, region, anchor, anchor.copy(), 0, tol,
                       certificate_samples, seed, polished=True)

    xi0, viol = _phase_one(G_s, h_s)
    if viol * S > INFEASIBILITY_THRESHOLD * min(S, 1.0):
        raise InfeasibleRegion(f"smallest achievable violation {viol * S:.3e}",
                               violation=viol * S)

    # anchor already feasible: it is its own projection
    xi_a = (anchor - c) @ B / S
    off_frame = np.linalg.norm(c + (xi_a * S) @ B.T - anchor)
    if off_frame <= 1e-14 * (1.0 + np.max(np.abs(anchor))) and \
            np.max(G_s @ xi_a - h_s, initial=-np.inf) <= 0.0:
        return _result(geom, region, anchor, anchor.copy(), 0, tol,
                       certificate_samples, seed, polished=True)

    eps = 1e-13
    x, s, lam, iters, ok = _ipm(obj, G_s, h_s, xi0, eps, max_iter)
    y = _polish(obj, G_s, h_s, x, s, lam)
    polished = y is not None
    if not polished:
        y = x
        viol_y = np.max(G_s @ y - h_s, initial=0.0) * S
        if not ok and viol_y > tol:
            raise NonConvergence(
                f"interior point method did not converge in {max_iter} iterations",
                best=c + (y * S) @ B.T, residual=viol_y)
    point = c + (y * S) @ B.T
    if geom.p < 2.0:
        point = _snap(region, point, anchor, obj.D)
    return _result(geom, region, anchor, point, iters, tol, certificate_samples, seed,
                   polished=polished)


def _result(geom, region, anchor, point, iters, tol, samples, seed, polished):
    weights = _hull_weights(region, point) if region.has_hull else np.zeros(0)
    vi = vi_certificate(geom, region, point, anchor, samples=samples, seed=seed)
    return ProjectionResult(point=point, weights=weights, vi_residual=float(vi),
                            iterations=int(iters), polished=polished)


# -------------------------------------------------------------- certificate

def sample_region(region, n, rng, max_rounds=20):
    """Up to ``n`` random points of the region (rejection sampling).

    Hull regions draw Dirichlet combinations of the vertices; box-only
    regions draw uniformly from the finite part of the box.
    """
    out = []
    need = n
    for _ in range(max_rounds):
        if need <= 0:
            break
        m = max(2 * need, 16)
        if region.has_hull:
            V = region.hull_vertices
            w = rng.dirichlet(np.full(V.shape[0], 0.5), size=m)
            z = w @ V
        else:
            lo = np.where(np.isfinite(region.lower), region.lower, -1.0)
            hi = np.where(np.isfinite(region.upper), region.upper, 1.0)
            lo = np.minimum(lo, hi)
            z = rng.uniform(lo, hi, size=(m, region.dim))
        z = z[region.contains(z, tol=0.0)]
        out.append(z[:need])
        need -= len(out[-1])
    if not out:
        return np.zeros((0, region.dim))
    return np.vstack(out)


def _lp_support(region, direction):
    """``argmax <y, direction>`` over the region, or None if unbounded.

    Solved in coordinates scaled by the hull size so that the LP solver's
    absolute tolerances stay relative to the region.
    """
    c, B = region.frame()
    G, h = region.constraints((c, B))
    k = B.shape[1]
    if k == 0:
        return c.copy()
    S = region.hull.scale if region.has_hull else 1.0
    cost = -(B.T @ direction)
    cost = cost / max(np.max(np.abs(cost)), _TINY)
    res = linprog(cost, A_ub=G if G.size else None, b_ub=h / S if G.size else None,
                  bounds=[(None, None)] * k, method="highs")
    if res.status == 3:
        return None
    if res.status != 0:
        return np.full(region.dim, np.nan)
    return c + S * res.x @ B.T


def _pull_back(region, inner, outer, steps=60):
    """Farthest verified member on the segment from ``inner`` to ``outer``."""
    if region.contains(outer, 1e-12)[0]:
        return outer
    lo, hi = 0.0, 1.0
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if region.contains(inner + mid * (outer - inner), 1e-12)[0]:
            lo = mid
        else:
            hi = mid
    return inner + lo * (outer - inner)


def vi_certificate(geom, region, candidate, anchor, samples=64, seed=0):
    """Smallest value of ``<candidate - y, J(anchor - candidate)>``.

    The minimum runs over the feasible hull vertices, ``samples`` random
    feasible points, and the LP maximizer of ``<y, J(anchor - candidate)>``
    (the worst test point). A value ``>= -tol`` certifies ``candidate`` as
    the projection of ``anchor`` up to tolerance. Deterministic for a fixed
    ``seed``.
    """
    candidate = as_point(geom, candidate, "candidate")
    anchor = as_point(geom, anchor, "anchor")
    g = duality_map(geom, anchor - candidate)
    if not np.any(g):
        return 0.0
    tests = []
    if region.has_hull:
        V = region.hull_vertices
        tests.append(V[region.contains(V, tol=1e-12)])
    rng = np.random.default_rng(seed)
    if samples > 0:
        tests.append(sample_region(region, samples, rng))
    support = _lp_support(region, g)
    if support is None:
        return -np.inf
    if np.all(np.isfinite(support)):
        # the LP vertex may sit outside by the solver tolerance; the test
        # value is linear along the segment, so shrinking keeps its sign
        if region.contains(candidate, 1e-10)[0]:
            support = _pull_back(region, candidate, support)
        tests.append(support[None, :])
    Y = np.vstack(tests) if tests else np.zeros((0, geom.dim))
    if Y.shape[0] == 0:
        return 0.0
    return float(np.min((candidate - Y) @ g))


# ------------------------------------------------------------------- oracle

def _affine_frame(points, rank_tol=1e-10):
    center = points.mean(axis=0)
    X = points - center
    scale = np.max(np.linalg.norm(X, axis=1))
    if scale == 0:
        return center, np.zeros((points.shape[1], 0))
    _, sv, vt = np.linalg.svd(X / scale, full_matrices=False)
    rank = int(np.sum(sv > rank_tol * max(sv[0], 1.0)))
    return center, vt[:rank].T


def _brute_force_facets(eta, tol=1e-10):
    """Facets of conv(eta) by enumerating all k-subsets of points."""
    m, k = eta.shape
    if k == 1:
        return np.array([[1.0], [-1.0]]), np.array([eta.max(), -eta.min()])
    scale = max(np.max(np.abs(eta)), 1e-300)
    normals, offsets = [], []
    for idx in itertools.combinations(range(m), k):
        P = eta[list(idx)]
        D = P[1:] - P[0]
        _, sv, vt = np.linalg.svd(D)
        if sv.size < k - 1 or sv[-1] <= 1e-12 * scale:
            continue
        nvec = vt[-1]
        off = nvec @ P[0]
        vals = eta @ nvec - off
        if np.all(vals <= tol * scale):
            normals.append(nvec); offsets.append(off)
        elif np.all(vals >= -tol * scale):
            normals.append(-nvec); offsets.append(-off)
    return np.array(normals).reshape(-1, k), np.array(offsets)


def euclidean_oracle(region, anchor):
    """Exact Euclidean projection for small regions, independent of ``project``.

    The hull is converted to facet form by brute-force enumeration and the
    resulting least-distance program is solved through non-negative least
    squares (Lawson and Hanson). Limited to at most 32 half-spaces and 64
    hull vertices.
    """
    anchor = np.asarray(anchor, dtype=float)
    d = region.dim
    if len(region.halfspaces) > 32 or region.hull_vertices.shape[0] > 64:
        raise ValueError("oracle supports at most 32 half-spaces and 64 vertices")
    if region.has_hull:
        center, B = _affine_frame(region.hull_vertices)
    else:
        center, B = np.zeros(d), np.eye(d)
    k = B.shape[1]
    rows, rhs = [], []
    for i in range(d):
        if np.isfinite(region.upper[i]):
            e = np.zeros(d); e[i] = 1.0
            rows.append(e); rhs.append(region.upper[i])
        if np.isfinite(region.lower[i]):
            e = np.zeros(d); e[i] = -1.0
            rows.append(e); rhs.append(-region.lower[i])
    for hs in region.halfspaces:
        rows.append(hs.normal / np.linalg.norm(hs.normal))
        rhs.append(hs.offset / np.linalg.norm(hs.normal))
    A = np.array(rows).reshape(-1, d)
    b = np.array(rhs) - A @ center
    G = A @ B
    if region.has_hull and k > 0:
        eta = (region.hull_vertices - center) @ B
        Fn, Fo = _brute_force_facets(eta)
        G = np.vstack([G, Fn])
        b = np.concatenate([b, Fo])
    if k == 0:
        if A.shape[0] and np.max(A @ center - np.array(rhs)) > 1e-9:
            raise InfeasibleRegion("single-point region violates constraints")
        return center.copy()
    # the projection onto c + span(B) has reduced coordinates t; minimize
    # ||eta - t|| subject to G eta <= b, i.e. LDP in z = eta - t
    t = (anchor - center) @ B
    if G.shape[0] == 0:
        return center + t @ B.T
    E = -G
    f = G @ t - b
    nrm = np.maximum(np.linalg.norm(E, axis=1), 1e-300)
    E, f = E / nrm[:, None], f / nrm
    fs = max(np.max(np.abs(f)), 1.0)
    M = np.vstack([E.T, f[None, :] / fs])
    rhs_v = np.zeros(k + 1)
    rhs_v[-1] = 1.0
    u = _nnls(M, rhs_v)
    r = M @ u - rhs_v
    if abs(r[-1]) <= 1e-12:
        raise InfeasibleRegion("least-distance program is infeasible")
    z = -r[:k] / r[-1] * fs
    return center + (t + z) @ B.T
