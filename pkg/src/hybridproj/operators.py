"""Test mappings with computable iterates and known fixed points.

Every operator is a self map of a bounded domain ``C`` (an axis box or an
l^p ball) together with a declared sequence ``k_n >= 1`` such that

    ||T^n x - T^n y|| <= k_n ||x - y||     for x, y in C,

with ``k_n -> 1``. ``empirical_lipschitz`` estimates the left-hand ratio by
sampling and is used to certify the declarations.

Built-in kinds
--------------
contraction_scale
    ``T x = c + lam (x - c)`` with ``|lam| <= 1``; ``lam = 1`` is the identity.
rotation
    Rotation by ``theta`` in the plane of two coordinates, on a ball about
    the origin. An isometry for p = 2, and for any p when theta is a multiple
    of pi/2.
gk_truncated
    ``T(x_1, ..., x_d) = (0, x_1^2, a_2 x_2, ..., a_{d-1} x_{d-1})`` on the
    unit ball. ``k_1 = 2`` but ``T^n = 0`` for ``n >= d``, so the map is
    asymptotically nonexpansive without being nonexpansive.
projection_onto_box
    Coordinate clamp onto a sub-box ``B`` of ``C``; ``F(T) = B``.
composite
    Composition of nonexpansive built-ins sharing one domain.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import DomainViolation
from .space import Geometry, as_point, norm

__all__ = ["Domain", "OperatorSpec", "apply_iterate", "empirical_lipschitz",
           "contraction_scale", "identity", "rotation", "gk_truncated",
           "projection_onto_box", "composite", "make_operator", "KINDS"]

KINDS = ("contraction_scale", "rotation", "gk_truncated", "projection_onto_box",
         "composite", "identity")


@dataclass(frozen=True)
class Domain:
    """Bounded closed convex set: an axis box or an l^p ball."""

    kind: str
    geom: Geometry
    lower: np.ndarray = None
    upper: np.ndarray = None
    center: np.ndarray = None
    radius: float = None

    @classmethod
    def box(cls, geom, lower=-1.0, upper=1.0):
        lo = np.broadcast_to(np.asarray(lower, dtype=float), (geom.dim,)).copy()
        hi = np.broadcast_to(np.asarray(upper, dtype=float), (geom.dim,)).copy()
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))) or np.any(lo > hi):
            raise ValueError("box domain must be bounded with lower <= upper")
        return cls("box", geom, lower=lo, upper=hi)

    @classmethod
    def ball(cls, geom, radius=1.0, center=None):
        c = np.zeros(geom.dim) if center is None else as_point(geom, center, "center")
        if not radius > 0 or not math.isfinite(radius):
            raise ValueError("ball radius must be positive and finite")
        return cls("ball", geom, center=c, radius=float(radius))

    def violation(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self.kind == "box":
            return np.maximum(np.max(self.lower - x, axis=1), np.max(x - self.upper, axis=1))
        return norm(self.geom, x - self.center) - self.radius

    def contains(self, x, tol=1e-10):
        return self.violation(x) <= tol

    def bounds(self):
        if self.kind == "box":
            return self.lower.copy(), self.upper.copy()
        # the l^p ball is contained in the cube of half-width radius
        return self.center - self.radius, self.center + self.radius

    def diameter(self):
        lo, hi = self.bounds()
        if self.kind == "box":
            return float(norm(self.geom, hi - lo))
        return 2.0 * self.radius

    def sample(self, n, rng):
        """``n`` uniform points of the domain."""
        d = self.geom.dim
        if self.kind == "box":
            return rng.uniform(self.lower, self.upper, size=(n, d))
        # uniform on the l^p ball via generalized Gaussians (Barthe et al.)
        p = self.geom.p
        mag = rng.gamma(1.0 / p, 1.0, size=(n, d)) ** (1.0 / p)
        y = mag * rng.choice([-1.0, 1.0], size=(n, d))
        z = rng.exponential(1.0, size=(n, 1))
        x = y / (np.sum(np.abs(y) ** p, axis=1, keepdims=True) + z) ** (1.0 / p)
        return self.center + self.radius * x

    def to_dict(self):
        if self.kind == "box":
            return {"type": "box", "lower": self.lower.tolist(), "upper": self.upper.tolist()}
        return {"type": "ball", "radius": self.radius, "center": self.center.tolist()}


@dataclass(frozen=True)
class OperatorSpec:
    """A mapping ``T: C -> C`` with iterates, ``k_n`` and known fixed points.

    Instances are produced by the builder functions of this module; the
    ``_power`` callable evaluates ``T^n`` on a stack of points.
    """

    kind: str
    params: dict
    geom: Geometry
    domain: Domain
    known_fixed_points: np.ndarray
    _power: object = field(repr=False)
    _kn: object = field(repr=False)
    _fixed_projection: object = field(default=None, repr=False)

    def kn(self, n):
        """Declared Lipschitz bound of ``T^n``."""
        if n < 1:
            raise ValueError("k_n is defined for n >= 1")
        return float(self._kn(int(n)))

    def power(self, n, x):
        """``T^n x`` without domain checks; ``x`` may be a stack of points."""
        x = np.asarray(x, dtype=float)
        if n == 0:
            return x.copy()
        return self._power(int(n), x)

    def __call__(self, x):
        return self.power(1, x)

    @property
    def nonexpansive(self):
        return self.kn(1) <= 1.0

    def fixed_set_projection(self, x):
        """Metric projection onto ``F(T)`` when it has a closed form, else None."""
        if self._fixed_projection is None:
            return None
        return self._fixed_projection(np.asarray(x, dtype=float))

    def distance_to_fixed(self, x):
        """``dist(x, F(T))``, from the closed form or the known fixed points."""
        x = np.asarray(x, dtype=float)
        proj = self.fixed_set_projection(x)
        if proj is not None:
            return float(norm(self.geom, x - proj))
        if len(self.known_fixed_points) == 0:
            return float("nan")
        return float(np.min(norm(self.geom, self.known_fixed_points - x)))

    def to_dict(self):
        return {"kind": self.kind, "params": self.params, "domain": self.domain.to_dict()}


def apply_iterate(op, n, x, tol=1e-8):
    """Evaluate ``T^n x``.

    Raises
    ------
    DomainViolation
        If ``x`` lies outside the operator's domain by more than ``tol``.
    """
    if n < 1:
        raise ValueError("iterate power must be >= 1")
    x = as_point(op.geom, x)
    if not np.all(op.domain.contains(x, tol)):
        raise DomainViolation(f"point outside the domain of {op.kind}")
    return op.power(n, x)


def empirical_lipschitz(op, n, pairs=1000, seed=0, refine_rounds=200):
    """Largest observed ``||T^n x - T^n y|| / ||x - y||`` over sampled pairs.

    Half of the pairs are independent uniform draws, the other half are
    close pairs (relative separation 1e-4 to 1e-1), which is where local
    slopes such as ``d/dx x^2 = 2x`` show up. The best pairs are then
    improved by a random local search that keeps both points in the domain,
    since suprema often sit on thin parts of the domain.
    """
    if pairs < 100:
        raise ValueError("need at least 100 pairs")
    geom = op.geom
    rng = np.random.default_rng(seed)
    far = pairs // 2
    near = pairs - far
    x1 = op.domain.sample(far, rng)
    y1 = op.domain.sample(far, rng)
    x2 = op.domain.sample(near, rng)
    diam = op.domain.diameter()
    step = diam * 10.0 ** rng.uniform(-4, -1, size=(near, 1))
    direction = rng.normal(size=x2.shape)
    direction /= norm(geom, direction)[:, None]
    y2 = x2 + step * direction
    inside = op.domain.contains(y2, 0.0)
    x = np.vstack([x1, x2[inside]])
    y = np.vstack([y1, y2[inside]])

    def ratio(x, y):
        dxy = norm(geom, x - y)
        out = np.zeros(len(x))
        ok = dxy > 0
        out[ok] = norm(geom, op.power(n, x[ok]) - op.power(n, y[ok])) / dxy[ok]
        return out

    r = ratio(x, y)
    best = float(np.max(r))
    if refine_rounds:
        top = np.argsort(r)[-8:]
        x, y, r = x[top], y[top], r[top]
        scale = 0.1 * diam
        for _ in range(refine_rounds):
            xs = x + scale * rng.normal(size=x.shape)
            ys = y + scale * rng.normal(size=y.shape)
            ok = op.domain.contains(xs, 0.0) & op.domain.contains(ys, 0.0)
            rs = np.where(ok, ratio(xs, ys), -1.0)
            better = rs > r
            x[better], y[better], r[better] = xs[better], ys[better], rs[better]
            scale *= 0.97
        best = max(best, float(np.max(r)))
    return best


# ----------------------------------------------------------------- builders

def _default_domain(geom, domain):
    return Domain.box(geom) if domain is None else domain


def contraction_scale(geom, lam=0.5, center=None, domain=None):
    """``T x = c + lam (x - c)``; a nonexpansive self map of any convex C ∋ c."""
    lam = float(lam)
    if not abs(lam) <= 1.0:
        raise ValueError("contraction factor must satisfy |lam| <= 1")
    domain = _default_domain(geom, domain)
    c = np.zeros(geom.dim) if center is None else as_point(geom, center, "center")
    if not np.all(domain.contains(c)):
        raise ValueError("contraction center must lie in the domain")
    if domain.kind == "box":
        image = c + lam * (np.array(domain.bounds()) - c)
        escapes = not np.all(domain.contains(image, 1e-12))
    else:
        escapes = (norm(geom, c + lam * (domain.center - c) - domain.center)
                   + abs(lam) * domain.radius > domain.radius * (1 + 1e-12))
    if escapes:
        raise ValueError("contraction does not map the domain into itself")

    def power(n, x):
        return c + lam ** n * (x - c)

    if lam == 1.0:
        lo, hi = domain.bounds()
        fixed = np.vstack([c, lo, hi]) if domain.kind == "box" else c[None, :]
        fproj = lambda x: x.copy()
    else:
        fixed = c[None, :]
        fproj = lambda x: np.broadcast_to(c, x.shape).copy()
    params = {"lam": lam, "center": c.tolist()}
    return OperatorSpec("contraction_scale", params, geom, domain, fixed, power,
                        lambda n: 1.0, fproj)


def identity(geom, domain=None):
    """The identity on C, as the ``lam = 1`` contraction."""
    return contraction_scale(geom, 1.0, domain=domain)


def rotation(geom, theta=1.0, plane=(0, 1), radius=3.0):
    """Rotation by ``theta`` in coordinate plane ``plane`` on a ball of ``radius``."""
    if geom.dim < 2:
        raise ValueError("rotation needs dimension >= 2")
    i, j = (int(v) for v in plane)
    if i == j or not (0 <= i < geom.dim and 0 <= j < geom.dim):
        raise ValueError("invalid rotation plane")
    theta = float(theta)
    quarter = theta / (math.pi / 2)
    if not geom.euclidean and abs(quarter - round(quarter)) > 1e-12:
        raise ValueError("rotations are l^p isometries only for p = 2 or "
                         "multiples of pi/2")
    domain = Domain.ball(geom, radius)

    def power(n, x):
        ang = n * theta
        cs, sn = math.cos(ang), math.sin(ang)
        out = np.array(x, dtype=float, copy=True)
        xi, xj = x[..., i], x[..., j]
        out[..., i] = cs * xi - sn * xj
        out[..., j] = sn * xi + cs * xj
        return out

    def fproj(x):
        out = np.array(x, dtype=float, copy=True)
        out[..., [i, j]] = 0.0
        return out

    fixed = [np.zeros(geom.dim)]
    for k in range(geom.dim):
        if k not in (i, j):
            e = np.zeros(geom.dim)
            e[k] = radius / 2
            fixed.append(e)
    params = {"theta": theta, "plane": [i, j], "radius": float(radius)}
    return OperatorSpec("rotation", params, geom, domain, np.array(fixed), power,
                        lambda n: 1.0, fproj)


def gk_truncated(geom, weights=None):
    """Truncated Goebel-Kirk shift on the unit ball.

    ``weights`` are ``a_2, ..., a_{d-1}`` in (0, 1]; the default makes their
    product 1/2, so that ``k_1 = 2`` and the iterate ``T^{d-1}`` is exactly
    nonexpansive.
    """
    d = geom.dim
    if d < 2:
        raise ValueError("gk_truncated needs dimension >= 2")
    if weights is None:
        weights = [0.5 ** (1.0 / (d - 2))] * (d - 2) if d > 2 else []
    a = np.asarray(weights, dtype=float).ravel()
    if a.size != d - 2:
        raise ValueError(f"need {d - 2} weights for dimension {d}")
    if np.any(a <= 0) or np.any(a > 1):
        raise ValueError("weights must lie in (0, 1]")
    domain = Domain.ball(geom, 1.0)

    def step(x):
        out = np.zeros_like(x)
        out[..., 1] = x[..., 0] ** 2
        if d > 2:
            out[..., 2:] = a * x[..., 1:d - 1]
        return out

    def power(n, x):
        if n >= d:
            return np.zeros_like(x)
        for _ in range(n):
            x = step(x)
        return x

    # coefficient and source of each output coordinate of T^n; x_1 enters
    # squared, with slope at most 2 on the unit ball
    coef = np.concatenate([[1.0, 1.0], a])  # multiplier applied when moving to slot k

    def kn(n):
        if n >= d:
            return 1.0
        best = 0.0
        for out_slot in range(n, d):
            src = out_slot - n
            factor = float(np.prod(coef[src + 1:out_slot + 1]))
            if src == 0:
                factor *= 2.0
            best = max(best, factor)
        return max(1.0, best)

    params = {"weights": a.tolist()}
    return OperatorSpec("gk_truncated", params, geom, domain, np.zeros((1, d)), power,
                        kn, lambda x: np.zeros_like(x))


def projection_onto_box(geom, lower, upper, domain=None):
    """Clamp onto the sub-box ``[lower, upper]`` of the domain.

    The clamp is the metric projection onto the box in every l^p norm, so
    ``P_F x = clip(x)``. Only the box center is listed as a known fixed
    point: it lies deep inside every sampled level set, unlike the corners.
    """
    domain = _default_domain(geom, domain)
    lo = np.broadcast_to(np.asarray(lower, dtype=float), (geom.dim,)).copy()
    hi = np.broadcast_to(np.asarray(upper, dtype=float), (geom.dim,)).copy()
    if np.any(lo > hi):
        raise ValueError("sub-box must satisfy lower <= upper")
    corners = np.array([lo, hi])
    if not np.all(domain.contains(corners)):
        raise ValueError("sub-box must lie inside the domain")

    def power(n, x):
        return np.clip(x, lo, hi)

    params = {"lower": lo.tolist(), "upper": hi.tolist()}
    return OperatorSpec("projection_onto_box", params, geom, domain,
                        ((lo + hi) / 2)[None, :], power, lambda n: 1.0,
                        lambda x: np.clip(x, lo, hi))


def composite(parts, domain=None):
    """``T = parts[-1] ∘ ... ∘ parts[0]`` for nonexpansive parts.

    Known fixed points are the common ones that are fixed by the composite.
    """
    parts = list(parts)
    if not parts:
        raise ValueError("composite needs at least one part")
    geom = parts[0].geom
    if any(p.geom != geom for p in parts):
        raise ValueError("composite parts must share a geometry")
    if any(not p.nonexpansive for p in parts):
        raise ValueError("composite parts must be nonexpansive")
    domain = parts[0].domain if domain is None else domain

    def once(x):
        for p in parts:
            x = p.power(1, x)
        return x

    def power(n, x):
        for _ in range(n):
            x = once(x)
        return x

    cands = np.vstack([p.known_fixed_points for p in parts])
    if len(cands):
        ok = norm(geom, once(cands) - cands) <= 1e-12
        ok &= domain.contains(cands)
        cands = cands[ok]
    params = {"parts": [p.to_dict() for p in parts]}
    return OperatorSpec("composite", params, geom, domain, cands.reshape(-1, geom.dim),
                        power, lambda n: 1.0, None)


def _domain_from_dict(geom, spec):
    if spec is None:
        return None
    if spec.get("type", "box") == "box":
        return Domain.box(geom, spec.get("lower", -1.0), spec.get("upper", 1.0))
    return Domain.ball(geom, spec.get("radius", 1.0), spec.get("center"))


def make_operator(geom, kind, params=None, domain=None):
    """Build an operator from a kind name and a parameter dictionary."""
    params = dict(params or {})
    dom = _domain_from_dict(geom, domain)
    if kind == "contraction_scale":
        return contraction_scale(geom, params.get("lam", 0.5), params.get("center"), dom)
    if kind == "identity":
        return identity(geom, dom)
    if kind == "rotation":
        return rotation(geom, params.get("theta", 1.0), params.get("plane", (0, 1)),
                        params.get("radius", 3.0))
    if kind == "gk_truncated":
        return gk_truncated(geom, params.get("weights"))
    if kind == "projection_onto_box":
        return projection_onto_box(geom, params.get("lower", -0.5),
                                   params.get("upper", 0.5), dom)
    if kind == "composite":
        subs = [make_operator(geom, p["kind"], p.get("params"), p.get("domain", domain))
                for p in params.get("parts", [])]
        return composite(subs, dom)
    raise ValueError(f"unknown operator kind {kind!r}")
