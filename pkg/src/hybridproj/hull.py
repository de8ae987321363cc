"""Convex hulls of finite point sets, possibly lower dimensional.

A point cloud is reduced to its affine hull ``c + span(B)`` first, so flat
clouds (collinear points in the plane, a single point, ...) are handled by
running qhull in the reduced coordinates, or skipping it entirely when the
reduced dimension is 0 or 1.
"""

import numpy as np
from scipy.spatial import ConvexHull, QhullError

__all__ = ["HullIndex"]


class HullIndex:
    """Facet description of ``conv(points)``.

    Attributes
    ----------
    center : ndarray (d,)
        Centroid of the points.
    basis : ndarray (d, k)
        Orthonormal basis of the affine hull directions.
    scale : float
        Largest distance of a point from ``center``; zero for a single point.
    normals, offsets : ndarray
        Facets in reduced coordinates ``eta = (y - center) @ basis``:
        ``normals @ eta <= offsets`` with unit normals.
    vertex_indices : ndarray of int
        Indices of the extreme points among the input points.
    """

    def __init__(self, points, rank_tol=1e-10):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[0] == 0:
            raise ValueError("cannot build the hull of an empty point set")
        self.points = pts
        self.dim = pts.shape[1]
        self.center = pts.mean(axis=0)
        centered = pts - self.center
        self.scale = float(np.max(np.linalg.norm(centered, axis=1)))
        if self.scale == 0.0:
            self.basis = np.zeros((self.dim, 0))
        else:
            _, sv, vt = np.linalg.svd(centered / self.scale, full_matrices=False)
            rank = int(np.sum(sv > rank_tol * max(sv[0], 1.0)))
            self.basis = vt[:rank].T
        self.rank = self.basis.shape[1]
        self._facets()

    def _facets(self):
        k = self.rank
        if k == 0:
            self.normals = np.zeros((0, 0))
            self.offsets = np.zeros(0)
            self.vertex_indices = np.array([0])
            return
        eta = self.reduce(self.points)
        if k == 1:
            lo, hi = int(np.argmin(eta[:, 0])), int(np.argmax(eta[:, 0]))
            self.normals = np.array([[1.0], [-1.0]])
            self.offsets = np.array([eta[hi, 0], -eta[lo, 0]])
            self.vertex_indices = np.unique([lo, hi])
            return
        try:
            hull = ConvexHull(eta)
        except QhullError:
            hull = ConvexHull(eta, qhull_options="QJ")
        eq = hull.equations
        normals, offsets = eq[:, :-1], -eq[:, -1]
        # coplanar simplicial facets repeat the same plane
        key = np.round(np.column_stack([normals, offsets / self.scale]), 11)
        _, keep = np.unique(key, axis=0, return_index=True)
        keep.sort()
        self.normals = normals[keep]
        self.offsets = offsets[keep]
        self.vertex_indices = np.sort(hull.vertices)

    @property
    def vertices(self):
        return self.points[self.vertex_indices]

    def reduce(self, y):
        """Reduced coordinates of ``y`` in the affine hull frame."""
        return (np.asarray(y, dtype=float) - self.center) @ self.basis

    def lift(self, eta):
        return self.center + np.asarray(eta, dtype=float) @ self.basis.T

    def violation(self, y):
        """Largest constraint violation of ``y`` (rows), in absolute units.

        Combines the distance to the affine hull with the facet violations.
        """
        y = np.atleast_2d(np.asarray(y, dtype=float))
        eta = self.reduce(y)
        off_plane = np.linalg.norm(y - self.lift(eta), axis=1)
        if self.rank == 0:
            return off_plane
        facet = np.max(eta @ self.normals.T - self.offsets, axis=1)
        return np.maximum(off_plane, facet)

    def contains(self, y, tol=1e-10):
        """Membership test; ``tol`` is relative to the hull size when small."""
        return self.violation(y) <= self.abs_tol(tol)

    def abs_tol(self, tol):
        roundoff = 4 * np.finfo(float).eps * (np.max(np.abs(self.center)) + self.scale)
        return tol * min(self.scale, 1.0) + roundoff

    def halfspaces(self):
        """Facets lifted to the ambient space as ``A y <= b``.

        Only meaningful for full-dimensional hulls; flat hulls also need the
        affine-hull equalities, which callers get by working in reduced
        coordinates instead.
        """
        A = self.normals @ self.basis.T
        b = self.offsets + A @ self.center
        return A, b
