"""Sampled inner approximations of residual sublevel sets.

The nested iteration needs the closed convex hull of

    S = {z in C_prev : ||z - T^n z|| <= bound}

which is generally not convex and has no closed form. We sample points of
``S`` and take their convex hull, an inner approximation that only shrinks
the region the anchor is projected onto.

Sampling mixes three sources:

* uniform draws from the bounding box of ``C_prev`` (rejected if outside),
* importance draws in log-uniform multi-scale balls around the
  lowest-residual points seen so far, re-centred over a few stages,
* boundary refinement: bisection along rays leaving the best point, which
  pushes the hull out towards the true boundary of ``S``.

Every returned point is checked against both membership tests.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyLevelSet
from .hull import HullIndex
from .projection import FeasibleRegion
from .space import as_point, norm

__all__ = ["SamplerConfig", "LevelSetThreshold", "sample_level_set", "build_region",
           "extend_toward", "level_residual"]

MEMBERSHIP_TOL = 1e-10


@dataclass(frozen=True)
class SamplerConfig:
    """Sampling budget and hull size controls.

    Parameters
    ----------
    samples_per_round : int
        Uniform plus importance draws per call (before boundary refinement).
    importance_fraction : float
        Share of the budget spent near low-residual points.
    seed : int
        Base seed; round ``n`` uses the stream ``default_rng([seed, n])``.
    max_hull_vertices : int or None
        Cap on hull vertices when ``d > 3``; None means ``16 d``.
    boundary_rays : int
        Number of bisection rays in the refinement pass (0 disables it).
    descent_steps : int
        Length of the averaged-iteration chains ``z <- (z + T^n z) / 2``
        started from the candidates and the best points before importance
        sampling (0 disables them).
    refine_rounds : int
        Rounds of hull refinement around each projection: rays from the
        projected point toward the anchor add level-set points the hull
        missed, then the anchor is projected again (0 disables it).
    """

    samples_per_round: int = 2000
    importance_fraction: float = 0.5
    seed: int = 0
    max_hull_vertices: int = None
    boundary_rays: int = 64
    descent_steps: int = 200
    refine_rounds: int = 4

    def __post_init__(self):
        if int(self.samples_per_round) < 2:
            raise ValueError("samples_per_round must be at least 2")
        if not 0.0 <= self.importance_fraction <= 1.0:
            raise ValueError("importance_fraction must lie in [0, 1]")
        if self.max_hull_vertices is not None and int(self.max_hull_vertices) < 2:
            raise ValueError("max_hull_vertices must be at least 2")
        if min(int(self.boundary_rays), int(self.descent_steps), int(self.refine_rounds)) < 0:
            raise ValueError("boundary_rays, descent_steps and refine_rounds must be"
                             " nonnegative")

    def validate(self, dim):
        if self.samples_per_round < dim + 1:
            raise ValueError(f"samples_per_round must be >= d+1 = {dim + 1}")
        if self.hull_cap(dim) < dim + 1:
            raise ValueError(f"max_hull_vertices must be >= d+1 = {dim + 1}")
        return self

    def hull_cap(self, dim):
        return 16 * dim if self.max_hull_vertices is None else int(self.max_hull_vertices)

    def doubled(self):
        return SamplerConfig(2 * self.samples_per_round, self.importance_fraction,
                             self.seed, self.max_hull_vertices, 2 * self.boundary_rays,
                             2 * self.descent_steps, self.refine_rounds)

    def to_dict(self):
        return {"samples_per_round": self.samples_per_round,
                "importance_fraction": self.importance_fraction,
                "seed": self.seed, "max_hull_vertices": self.max_hull_vertices,
                "boundary_rays": self.boundary_rays,
                "descent_steps": self.descent_steps,
                "refine_rounds": self.refine_rounds}


@dataclass(frozen=True)
class LevelSetThreshold:
    """``bound = tn * residual`` for the level condition of round ``n``."""

    tn: float
    residual: float
    bound: float = field(init=False)

    def __post_init__(self):
        if not 0.0 < self.tn < 1.0:
            raise ValueError(f"tn must lie in (0, 1), got {self.tn}")
        if not self.residual >= 0.0:
            raise ValueError("residual must be nonnegative")
        object.__setattr__(self, "bound", float(self.tn) * float(self.residual))


def level_residual(op, n, z):
    """``||z - T^n z||`` row-wise."""
    z = np.asarray(z, dtype=float)
    return norm(op.geom, z - op.power(n, z))


class _Pool:
    """Evaluated member points, tracking the lowest residuals."""

    def __init__(self, dim):
        self.pts = np.zeros((0, dim))
        self.res = np.zeros(0)

    def add(self, pts, res):
        self.pts = np.vstack([self.pts, pts])
        self.res = np.concatenate([self.res, res])

    def best(self, k):
        idx = np.argsort(self.res, kind="stable")[:k]
        return self.pts[idx], self.res[idx]


def _members(prev_region, domain, z):
    ok = prev_region.contains(z, MEMBERSHIP_TOL)
    if domain is not None:
        ok &= domain.contains(z, MEMBERSHIP_TOL)
    return z[ok]


def _box(prev_region, domain):
    lo, hi = prev_region.bounding_box()
    if domain is not None:
        dlo, dhi = domain.bounds()
        lo, hi = np.maximum(lo, dlo), np.minimum(hi, dhi)
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise ValueError("level-set sampling needs a bounded region")
    return lo, hi


def _ball_draws(rng, centers, res, m, diam, dim, bound):
    pick = rng.integers(len(centers), size=m)
    c = centers[pick]
    # near a fixed point the level set holds a ball of radius ~bound/(1+k),
    # so scales well below the bound are worth probing
    floor = 1e-8 * diam
    if bound > 0:
        floor = min(floor, 1e-3 * bound)
    floor = max(floor, 1e-300)
    # half the draws stay within a few residuals of their centre, where the
    # level set usually is once the residuals are small
    local = np.minimum(diam, 10.0 * (res[pick] + bound))
    top = np.where(rng.uniform(size=m) < 0.5, diam, local)
    top = np.maximum(top, floor)[:, None]
    radius = np.exp(rng.uniform(0.0, 1.0, size=(m, 1)) * np.log(top / floor)) * floor
    u = rng.normal(size=(m, dim))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    return c + radius * rng.uniform(size=(m, 1)) ** (1.0 / dim) * u


def _rays(op, n, bound, prev_region, domain, origin, directions, steps=48):
    """Last verified member of the level set along each ray from ``origin``."""
    lo_box, hi_box = _box(prev_region, domain)
    span = float(np.max(hi_box - lo_box))
    if span == 0.0 or len(directions) == 0:
        return np.zeros((0, origin.size))

    def ok(t, dirs=directions):
        z = origin + t[:, None] * dirs
        good = prev_region.contains(z, MEMBERSHIP_TOL)
        if domain is not None:
            good &= domain.contains(z, MEMBERSHIP_TOL)
        good &= level_residual(op, n, z) <= bound
        return good

    lo = np.zeros(len(directions))
    hi = np.full(len(directions), 2.0 * span)
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        good = ok(mid)
        lo = np.where(good, mid, lo)
        hi = np.where(good, hi, mid)
    keep = lo > 0
    z = origin + lo[keep, None] * directions[keep]
    # bisection assumes an interval; re-verify the endpoints
    return z[ok(lo[keep], directions[keep])] if len(z) else z


def _sample_once(geom, prev_region, op, n, thr, cfg, candidates, domain):
    d = geom.dim
    rng = np.random.default_rng([int(cfg.seed), int(n)])
    lo, hi = _box(prev_region, domain)
    diam = float(np.linalg.norm(hi - lo))
    pool = _Pool(d)
    accepted = []

    def evaluate(z):
        z = _members(prev_region, domain, z)
        if len(z):
            r = level_residual(op, n, z)
            pool.add(z, r)
            accepted.append(z[r <= thr.bound])

    starts = np.zeros((0, d))
    if candidates is not None and len(candidates):
        cand = np.atleast_2d(as_point(geom, candidates, "candidates"))
        evaluate(cand)
        # chains from the candidates (the current iterate first) explore the
        # part of the level set the next projection is heading to
        starts = cand[:32]

    m = cfg.samples_per_round
    m_imp = int(round(cfg.importance_fraction * m))
    m_uni = m - m_imp
    if m_uni:
        evaluate(rng.uniform(lo, hi, size=(m_uni, d)))
    if cfg.descent_steps and len(pool.res):
        z = np.vstack([starts, pool.best(8)[0]])
        chain = []
        for _ in range(cfg.descent_steps):
            z = 0.5 * (z + op.power(n, z))
            chain.append(z)
            if np.all(level_residual(op, n, z) <= 1e-3 * thr.bound):
                break
        evaluate(np.vstack(chain))
    stages = 4
    for s in range(stages):
        k = m_imp // stages + (1 if s < m_imp % stages else 0)
        if k == 0 or len(pool.res) == 0:
            continue
        centers, cres = pool.best(8)
        evaluate(_ball_draws(rng, centers, cres, k, diam, d, thr.bound))

    acc = np.vstack(accepted) if accepted else np.zeros((0, d))
    if len(acc) and cfg.boundary_rays:
        origin = pool.best(1)[0][0]
        if not level_residual(op, n, origin[None, :])[0] <= thr.bound:
            origin = acc[0]
        toward = acc - origin
        toward = toward[np.linalg.norm(toward, axis=1) > 0]
        nt = min(len(toward), cfg.boundary_rays // 2)
        if nt:
            toward = toward[rng.choice(len(toward), size=nt, replace=False)]
        else:
            toward = np.zeros((0, d))
        rand = rng.normal(size=(cfg.boundary_rays - nt, d))
        dirs = np.vstack([toward, rand])
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        extra = _rays(op, n, thr.bound, prev_region, domain, origin, dirs)
        acc = np.vstack([acc, extra])
    if len(acc):
        # images of members: for nonexpansive T the residual cannot grow, and
        # they reach parts of F(T) (corners, faces) that draws rarely hit
        img = _members(prev_region, domain, op.power(n, acc))
        if len(img):
            r = level_residual(op, n, img)
            pool.add(img, r)
            acc = np.vstack([acc, img[r <= thr.bound]])
    best = float(pool.res.min()) if len(pool.res) else float("inf")
    return acc, best, len(pool.res)


def sample_level_set(geom, prev_region, op, n, thr, cfg, candidates=None, domain=None,
                     return_info=False):
    """Points of ``prev_region`` whose ``T^n`` residual is at most ``thr.bound``.

    Parameters
    ----------
    geom : Geometry
    prev_region : FeasibleRegion
        Region to sample in (``C_{n-1}``); must be bounded.
    op : OperatorSpec
    n : int
        Iterate power.
    thr : LevelSetThreshold
    cfg : SamplerConfig
    candidates : array_like, optional
        Extra points (e.g. the current iterate) that seed the importance
        stage and are accepted if they qualify.
    domain : Domain, optional
        Extra membership test; defaults to ``op.domain``.
    return_info : bool
        Also return ``{"min_residual", "evaluated", "retried"}``.

    Returns
    -------
    ndarray of shape (k, d)

    Raises
    ------
    EmptyLevelSet
        If nothing qualifies even after one retry with a doubled budget.
    """
    if n < 1:
        raise ValueError("iterate power must be >= 1")
    if thr.bound < 0:
        raise ValueError("bound must be nonnegative")
    cfg.validate(geom.dim)
    domain = op.domain if domain is None else domain
    retried = False
    acc, best, evaluated = _sample_once(geom, prev_region, op, n, thr, cfg, candidates, domain)
    if len(acc) == 0:
        retried = True
        acc, best2, ev2 = _sample_once(geom, prev_region, op, n, thr, cfg.doubled(),
                                       candidates, domain)
        best, evaluated = min(best, best2), evaluated + ev2
    if len(acc) == 0:
        raise EmptyLevelSet(
            f"no point with residual <= {thr.bound:.3e} at n={n} "
            f"(best {best:.3e} over {evaluated} members)", min_residual=best, bound=thr.bound)
    acc = np.unique(acc, axis=0)
    if return_info:
        return acc, {"min_residual": best, "evaluated": evaluated, "retried": retried}
    return acc


def _farthest_points(points, k):
    """Greedy farthest-point subset of size ``k``, seeded at the extreme point."""
    centroid = points.mean(axis=0)
    chosen = [int(np.argmax(np.linalg.norm(points - centroid, axis=1)))]
    dist = np.linalg.norm(points - points[chosen[0]], axis=1)
    while len(chosen) < k:
        i = int(np.argmax(dist))
        if dist[i] == 0:
            break
        chosen.append(i)
        dist = np.minimum(dist, np.linalg.norm(points - points[i], axis=1))
    return points[np.sort(chosen)]


def extend_toward(geom, prev_region, op, n, thr, cfg, point, anchor, origins=(),
                  domain=None, round_index=0):
    """Level-set members beyond a hull, in the direction of the anchor.

    Rays start at ``point`` (a projection onto the current hull) and at the
    extra ``origins``, heading toward ``anchor`` and along a cone of nearby
    directions; each ray is bisected for its last member of the level set
    inside ``prev_region``. Origins that are not members themselves are
    skipped. Returns the verified points (possibly none).
    """
    d = geom.dim
    point = as_point(geom, point, "point")
    anchor = as_point(geom, anchor, "anchor")
    # points pulled toward F(T) by averaged steps sit deeper in the level set
    deeper = [point]
    for _ in range(3):
        deeper.append(0.5 * (deeper[-1] + op.power(n, deeper[-1])))
    starts = np.vstack([np.array(deeper), np.reshape(origins, (-1, d))])
    rng = np.random.default_rng([int(cfg.seed), int(n), 1 + int(round_index)])
    per_origin = max(cfg.boundary_rays // 8, 1)
    found = []
    for origin in starts:
        if not (len(_members(prev_region, domain, origin[None, :]))
                and level_residual(op, n, origin[None, :])[0] <= thr.bound):
            continue
        u = anchor - origin
        length = np.linalg.norm(u)
        if length == 0:
            continue
        u = u / length
        # directions that can decrease the distance to the anchor
        dirs = rng.normal(size=(per_origin - 1, d))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        dirs *= np.where(dirs @ u < 0, -1.0, 1.0)[:, None]
        dirs = np.vstack([u, dirs])
        found.append(_rays(op, n, thr.bound, prev_region, domain, origin, dirs))
    return np.vstack(found) if found else np.zeros((0, d))


def build_region(geom, accepted, halfspaces=(), cfg=None, lower=None, upper=None,
                 keep=None):
    """Region ``box ∩ conv(accepted) ∩ halfspaces`` with interior points pruned.

    The hull is exact for ``d <= 3``; in higher dimension a farthest-point
    subset of at most ``cfg.hull_cap(d)`` points is kept (an inner
    approximation), always including the rows of ``keep``.
    ``lower``/``upper`` default to an unbounded box.
    """
    cfg = SamplerConfig() if cfg is None else cfg
    pts = np.atleast_2d(as_point(geom, accepted, "accepted"))
    if pts.shape[0] == 0:
        raise ValueError("accepted must be nonempty")
    pts = np.unique(pts, axis=0)
    d = geom.dim
    if d > 3 and len(pts) > cfg.hull_cap(d):
        kept = np.zeros((0, d)) if keep is None else np.atleast_2d(keep)
        room = max(cfg.hull_cap(d) - len(kept), d + 1)
        pts = np.unique(np.vstack([_farthest_points(pts, room), kept]), axis=0)
    verts = HullIndex(pts).vertices
    lower = np.full(d, -np.inf) if lower is None else lower
    upper = np.full(d, np.inf) if upper is None else upper
    return FeasibleRegion(lower, upper, verts, list(halfspaces))
