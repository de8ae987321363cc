import numpy as np
import pytest

from gift import gift_wrap
from hybridproj.hull import HullIndex


@pytest.mark.parametrize("seed", range(5))
def test_vertex_count_matches_gift_wrapping(seed):
    rng = np.random.default_rng(seed)
    r = np.sqrt(rng.uniform(size=50))
    th = rng.uniform(0, 2 * np.pi, 50)
    pts = np.column_stack([r * np.cos(th), r * np.sin(th)])
    assert list(HullIndex(pts).vertex_indices) == gift_wrap(pts)


def test_collinear_points_reduce_to_segment():
    h = HullIndex([[0, 0], [1, 0], [0.5, 0]])
    assert h.rank == 1
    np.testing.assert_array_equal(h.vertices, [[0, 0], [1, 0]])
    assert h.contains([0.25, 0.0])[0]
    assert not h.contains([0.25, 1e-3])[0]
    assert not h.contains([1.1, 0.0])[0]


def test_single_point_hull():
    h = HullIndex([[1.0, 2.0, 3.0]] * 3)
    assert h.rank == 0 and h.contains([1.0, 2.0, 3.0])[0]
    assert not h.contains([1.0, 2.0, 3.1])[0]


def test_flat_triangle_in_space():
    h = HullIndex([[0, 0, 1], [1, 0, 1], [0, 1, 1], [0.2, 0.2, 1]])
    assert h.rank == 2 and len(h.vertex_indices) == 3
    assert h.contains([0.3, 0.3, 1])[0]
    assert not h.contains([0.3, 0.3, 1.001])[0]


def test_halfspaces_describe_full_dimensional_hull():
    rng = np.random.default_rng(1)
    pts = rng.normal(size=(30, 3))
    h = HullIndex(pts)
    A, b = h.halfspaces()
    assert np.all(pts @ A.T <= b + 1e-12)
    assert np.all(np.abs(h.vertices @ A.T - b).min(axis=1) <= 1e-12)
