"""Finite-dimensional l^p geometry.

For ``1 < p < inf`` the space ``(R^d, ||.||_p)`` is uniformly convex and
smooth, so the normalized duality mapping is single valued:

    J(x)_i = ||x||_p^(2-p) * |x_i|^(p-1) * sign(x_i)

and it satisfies ``<x, J(x)> = ||x||_p^2`` and ``||J(x)||_q = ||x||_p``
with ``1/p + 1/q = 1``.

All functions accept a single point of shape ``(d,)`` or a stack of points
of shape ``(..., d)`` and operate along the last axis.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import DimensionError

__all__ = ["Geometry", "as_point", "norm", "dual_norm", "duality_map", "pairing",
           "distance"]


@dataclass(frozen=True)
class Geometry:
    """The space R^dim equipped with the l^p norm.

    Parameters
    ----------
    dim : int
        Ambient dimension, at least 1.
    p : float
        Norm exponent, strictly between 1 and infinity. The endpoints give
        spaces that are neither smooth nor strictly convex and are rejected.
    """

    dim: int
    p: float = 2.0

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.dim!r}")
        p = float(self.p)
        if not (1.0 < p < math.inf):
            raise ValueError(f"exponent must satisfy 1 < p < inf, got p={self.p!r}")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "p", p)

    @property
    def q(self):
        """Conjugate exponent, ``1/p + 1/q = 1``."""
        return self.p / (self.p - 1.0)

    @property
    def euclidean(self):
        return self.p == 2.0

    def dual(self):
        """Geometry of the dual space (l^q)."""
        return Geometry(self.dim, self.q)


def as_point(geom, x, name="x"):
    """Validate ``x`` against ``geom`` and return it as a float array."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0 or arr.shape[-1] != geom.dim:
        raise DimensionError(
            f"{name} has shape {arr.shape}, expected trailing dimension {geom.dim}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def _lp_norm(x, p):
    # factor out the largest magnitude so |x_i|^p cannot overflow/underflow
    a = np.abs(x)
    m = a.max(axis=-1, keepdims=True)
    safe = np.where(m > 0, m, 1.0)
    s = np.sum((a / safe) ** p, axis=-1) ** (1.0 / p)
    return np.squeeze(m, -1) * s


def norm(geom, x):
    """l^p norm of ``x`` (along the last axis)."""
    x = as_point(geom, x)
    if geom.euclidean:
        return np.linalg.norm(x, axis=-1)
    return _lp_norm(x, geom.p)


def dual_norm(geom, xstar):
    """l^q norm of a dual element represented in coordinates."""
    xstar = as_point(geom, xstar, "xstar")
    if geom.euclidean:
        return np.linalg.norm(xstar, axis=-1)
    return _lp_norm(xstar, geom.q)


def distance(geom, x, y):
    return norm(geom, np.asarray(x, dtype=float) - np.asarray(y, dtype=float))


def duality_map(geom, x):
    """Normalized duality mapping ``J(x)``.

    For ``p = 2`` this is the identity and a plain copy of ``x`` is
    returned. Zero components map to zero (also for ``p < 2``, where
    ``0**(p-1)`` would otherwise be evaluated with a sign of zero).
    """
    x = as_point(geom, x)
    if geom.euclidean:
        return x.copy()
    p = geom.p
    a = np.abs(x)
    m = a.max(axis=-1, keepdims=True)
    safe = np.where(m > 0, m, 1.0)
    u = a / safe
    nu = np.sum(u ** p, axis=-1, keepdims=True) ** (1.0 / p)
    nu = np.where(nu > 0, nu, 1.0)
    return m * nu ** (2.0 - p) * u ** (p - 1.0) * np.sign(x)


def pairing(x, xstar):
    """Dual pairing ``<x, x*>`` in coordinates."""
    return np.sum(np.asarray(x, dtype=float) * np.asarray(xstar, dtype=float), axis=-1)
