import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quasiharmonic.geometry import (
    GeometryError,
    SampledSet,
    Scene,
    ShapeDescriptor,
    delta_neighborhood,
    distances,
    grid_in,
    hull_margin,
    resample,
    sample_shape,
    set_distance,
)


def brute_grid_count(inside, lo, hi, mesh):
    # independent fill: count lattice points of spacing mesh inside the region
    ax = np.arange(lo, hi + mesh / 2, mesh)
    X, Y = np.meshgrid(ax, ax)
    P = np.column_stack([X.ravel(), Y.ravel()])
    return int(inside(P).sum())


def test_circle_samples_on_circle():
    S = sample_shape(ShapeDescriptor.circle((0, 0), 1.0), 0.1)
    assert len(S) >= 62
    assert np.allclose(np.linalg.norm(S.points, axis=1), 1.0, atol=1e-12)


def test_single_point():
    S = sample_shape(ShapeDescriptor.finite_points([(0.0, 0.0)]), 0.3)
    assert S.points.tolist() == [[0.0, 0.0]]


def test_disk_count_matches_grid_fill():
    S = sample_shape(ShapeDescriptor.disk((0, 0), 1.0), 0.05)
    ref = brute_grid_count(lambda P: np.linalg.norm(P, axis=1) <= 1.0, -1.0, 1.0, 0.05)
    assert abs(len(S) - ref) <= 0.1 * ref


@pytest.mark.parametrize(
    "shape",
    [
        ShapeDescriptor.disk((0.3, -0.2), 0.7),
        ShapeDescriptor.annulus((0, 0), 0.4, 1.0),
        ShapeDescriptor.segment((-1, 0), (1, 0.5)),
        ShapeDescriptor.rectangle((0, 0), (1, 0.5)),
        ShapeDescriptor.circle((0, 0, 0), 1.0),
        ShapeDescriptor.disk((0, 0, 0), 0.5),
    ],
    ids=["disk", "annulus", "segment", "rectangle", "sphere", "ball"],
)
def test_coverage_and_membership(shape):
    mesh = 0.1
    S = sample_shape(shape, mesh)
    assert shape.contains(S.points, 1e-9).all()
    # every point of a fine reference sampling is within one mesh of S
    ref = sample_shape(shape, mesh / 3)
    assert distances(ref.points, S).max() <= mesh


def test_deterministic():
    shape = ShapeDescriptor.annulus((0, 0), 0.5, 1.0)
    a, b = sample_shape(shape, 0.07), sample_shape(shape, 0.07)
    assert np.array_equal(a.points, b.points)


def test_degenerate_shapes_rejected():
    with pytest.raises(GeometryError):
        ShapeDescriptor.disk((0, 0), -1.0)
    with pytest.raises(GeometryError):
        ShapeDescriptor.annulus((0, 0), 1.0, 0.5)
    with pytest.raises(GeometryError):
        ShapeDescriptor.segment((1, 1), (1, 1))
    with pytest.raises(GeometryError):
        sample_shape(ShapeDescriptor.disk((0, 0), 1.0), 0.0)


def test_duplicates_rejected():
    with pytest.raises(GeometryError):
        SampledSet("dup", np.array([[0.0, 0.0], [0.0, 0.0]]))


def test_shape_json_roundtrip():
    u = ShapeDescriptor.union([ShapeDescriptor.disk((0, 0), 1.0), ShapeDescriptor.segment((2, 0), (3, 0))])
    back = ShapeDescriptor.from_json(u.to_json())
    assert back.to_dict() == u.to_dict()
    assert json.loads(u.to_json())["kind"] == "union_of"


def test_set_csv():
    S = sample_shape(ShapeDescriptor.finite_points([(0, 0), (1, 2)]), 1.0)
    assert S.to_csv() == "x,y\n0.0,0.0\n1.0,2.0\n"


def test_delta_neighborhood_point():
    K = sample_shape(ShapeDescriptor.finite_points([(0.0, 0.0)]), 0.1)
    U = delta_neighborhood(K, 1.0, 0.1)
    assert np.all(np.linalg.norm(U.points, axis=1) < 1.0)
    assert [0.0, 0.0] in U.points.tolist()


def test_delta_neighborhood_circle():
    K = sample_shape(ShapeDescriptor.circle((0, 0), 1.0), 0.05)
    U = delta_neighborhood(K, 0.2, 0.05)
    r = np.linalg.norm(U.points, axis=1)
    assert r.min() > 0.8 and r.max() < 1.2
    # every sample of K is kept
    assert distances(K.points, U).max() == 0.0


def test_delta_neighborhood_count_matches_grid_scan():
    K = sample_shape(ShapeDescriptor.circle((0, 0), 1.0), 0.01)
    U = delta_neighborhood(K, 0.2, 0.05)
    ref = brute_grid_count(lambda P: np.abs(np.linalg.norm(P, axis=1) - 1.0) < 0.2, -1.3, 1.3, 0.05)
    grid_part = len(U) - len(K)
    assert abs(grid_part - ref) <= 0.1 * ref


def test_set_distance():
    S = sample_shape(ShapeDescriptor.circle((0, 0), 1.0), 0.05)
    assert set_distance(S.points[3], S) == 0.0
    assert abs(set_distance((2.0, 0.0), S) - 1.0) <= 0.05
    with pytest.raises(GeometryError):
        set_distance((1.0, 0.0, 0.0), S)


@given(st.floats(-3, 3), st.floats(-3, 3))
def test_set_distance_matches_scan(x, y):
    S = sample_shape(ShapeDescriptor.annulus((0.2, 0.1), 0.3, 0.9), 0.15)
    scan = min(np.hypot(x - p[0], y - p[1]) for p in S.points)
    assert set_distance((x, y), S) == pytest.approx(scan, abs=1e-12)


@given(st.floats(0.05, 0.5), st.floats(0.05, 0.5))
def test_delta_neighborhood_monotone(d1, d2):
    d1, d2 = sorted((d1, d2))
    K = sample_shape(ShapeDescriptor.segment((0, 0), (1, 0)), 0.1)
    U1 = delta_neighborhood(K, d1, 0.1)
    assert np.all(distances(U1.points, K) < d2 + 1e-15)


@given(st.floats(0.2, 0.9))
def test_nested_shapes(r):
    A = sample_shape(ShapeDescriptor.disk((0, 0), r), 0.1)
    B = sample_shape(ShapeDescriptor.disk((0, 0), 1.0), 0.1)
    assert distances(A.points, B).max() <= 0.1


def test_scene_validation():
    K = sample_shape(ShapeDescriptor.disk((0, 0), 1.0), 0.1, "K")
    D = sample_shape(ShapeDescriptor.disk((0, 0), 1.5), 0.1, "D")
    E = K.subset(np.abs(K.points[:, 0]) < 1e-12, "E")
    Scene(K, E, D, 0.3)
    assert hull_margin(K, D) == pytest.approx(0.5, abs=0.02)
    with pytest.raises(GeometryError):
        Scene(K, E, D, 1.0)
    off = SampledSet("E", np.array([[0.01234, 0.0]]))
    with pytest.raises(GeometryError):
        Scene(K, off, D, 0.3)


def test_resample_and_grid():
    S = sample_shape(ShapeDescriptor.disk((0, 0), 1.0), 0.2)
    fine = resample(S)
    assert fine.mesh == 0.1 and len(fine) > 3 * len(S)
    G = grid_in(S, 11)
    assert np.all(np.linalg.norm(G.points, axis=1) <= 1.0)
