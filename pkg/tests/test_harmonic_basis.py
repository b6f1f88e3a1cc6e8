import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.special import eval_legendre

from quasiharmonic.geometry import ShapeDescriptor, sample_shape
from quasiharmonic.harmonic_basis import (
    BasisError,
    BasisSpec,
    HarmonicPoly,
    basis_size,
    element_degrees,
    eval,
    eval_basis,
    sup_norm,
)

from oracles import fd_laplacian, random_ball


@pytest.mark.parametrize("dim,m,size", [(2, 0, 1), (2, 5, 11), (3, 3, 16), (3, 0, 1)])
def test_basis_size(dim, m, size):
    spec = BasisSpec(dim, m)
    assert basis_size(spec) == size
    assert len(eval_basis(spec, np.zeros(dim))) == size
    assert len(element_degrees(spec)) == size


def test_origin_values():
    v = eval_basis(BasisSpec(2, 6), (0.0, 0.0))
    assert v.tolist() == [1.0] + [0.0] * 12


def test_one_plus_i_squared():
    v = eval_basis(BasisSpec(2, 2), (1.0, 1.0))
    assert v[3] == 0.0 and v[4] == 2.0


@pytest.mark.parametrize("dim", [2, 3])
def test_harmonic_to_degree_10(dim, rng):
    spec = BasisSpec(dim, 10)
    X = random_ball(rng, 50, dim)
    res = np.abs(fd_laplacian(spec, X)) / (1 + np.abs(eval_basis(spec, X)))
    assert res.max() < 1e-6


def test_fd_detects_non_harmonic(rng):
    X = random_ball(rng, 10, 2)
    spec = BasisSpec(2, 2)
    # Re z^2 + (x^2 + y^2) is not harmonic; the FD oracle sees Laplacian 4
    def g(P):
        return eval_basis(spec, P)[:, 3] + (P**2).sum(axis=1)
    h = 1e-3
    lap = sum(
        (g(X + np.eye(2)[j] * h) - 2 * g(X) + g(X - np.eye(2)[j] * h)) / h**2 for j in range(2)
    )
    assert np.allclose(lap, 4.0, atol=1e-4)


def test_3d_zonal_is_legendre(rng):
    spec = BasisSpec(3, 8)
    X = random_ball(rng, 40, 3, 1.5)
    r = np.linalg.norm(X, axis=1)
    V = eval_basis(spec, X)
    for l in range(9):
        ref = r**l * eval_legendre(l, X[:, 2] / r)
        assert np.allclose(V[:, l * l + l], ref, atol=1e-12 * (1 + np.abs(ref).max()))


def test_3d_orthogonal_on_sphere():
    # product Gauss rule, exact for these polynomial degrees
    spec = BasisSpec(3, 6)
    t, w = np.polynomial.legendre.leggauss(16)
    phi = np.arange(32) * 2 * np.pi / 32
    T, P = np.meshgrid(t, phi, indexing="ij")
    W = np.outer(w, np.full(32, 2 * np.pi / 32)).ravel()
    s = np.sqrt(1 - T**2)
    X = np.column_stack([(s * np.cos(P)).ravel(), (s * np.sin(P)).ravel(), T.ravel()])
    V = eval_basis(spec, X)
    G = V.T @ (V * W[:, None])
    expect = np.diag([4 * np.pi / (2 * l + 1) for l in element_degrees(spec)])
    assert np.allclose(G, expect, atol=1e-12)


def test_2d_matches_complex_powers(rng):
    spec = BasisSpec(2, 9)
    X = rng.uniform(-1.2, 1.2, (100, 2))
    z = X[:, 0] + 1j * X[:, 1]
    c = rng.standard_normal(basis_size(spec))
    ref = c[0] + sum(c[2 * k - 1] * (z**k).real + c[2 * k] * (z**k).imag for k in range(1, 10))
    assert np.allclose(eval(HarmonicPoly(spec, c), X), ref, atol=1e-12)


def test_center_and_scale_change_coordinates_only(rng):
    X = rng.uniform(-1, 1, (30, 2))
    spec = BasisSpec(2, 4, (0.3, -0.1), 2.0)
    w = ((X[:, 0] - 0.3) + 1j * (X[:, 1] + 0.1)) / 2.0
    assert np.allclose(eval_basis(spec, X)[:, 7], (w**4).real)


def test_eval_trivia(rng):
    spec = BasisSpec(3, 3)
    X = rng.standard_normal((5, 3))
    assert np.all(eval(HarmonicPoly.zero(spec), X) == 0)
    e1 = np.zeros(16)
    e1[0] = 1
    assert np.all(eval(HarmonicPoly(spec, e1), X) == 1)


def test_sup_norm():
    C = sample_shape(ShapeDescriptor.circle((0, 0), 1.0), 0.05)
    spec = BasisSpec(2, 3)
    const = HarmonicPoly(spec, [-2.5] + [0] * 6)
    assert sup_norm(const, C) == 2.5
    re_z = HarmonicPoly(spec, [0, 1, 0, 0, 0, 0, 0])
    assert abs(sup_norm(re_z, C) - 1.0) <= 0.05**2


def test_sup_norm_refinement(rng):
    p = HarmonicPoly(BasisSpec(2, 6), rng.standard_normal(13))
    shape = ShapeDescriptor.disk((0, 0), 1.0)
    coarse = sup_norm(p, sample_shape(shape, 0.1))
    fine = sup_norm(p, sample_shape(shape, 0.05))
    # Lipschitz bound: |grad p| <= sum_k k |c_k| on the unit disk
    lip = sum(k * (abs(p.coeffs[2 * k - 1]) + abs(p.coeffs[2 * k])) for k in range(1, 7))
    assert coarse <= fine + 1e-12
    assert fine - coarse <= lip * 0.1


@pytest.mark.parametrize("dim", [2, 3])
def test_growth_scales_as_r_to_m(dim):
    m = 5
    spec = BasisSpec(dim, m)
    deg = element_degrees(spec)
    norms = []
    for R in (1.0, 2.0, 4.0):
        S = sample_shape(ShapeDescriptor.circle((0,) * dim, R), 0.05 * R)
        norms.append(np.abs(eval_basis(spec, S.points)).max(axis=0))
    norms = np.array(norms)
    slope = np.polyfit(np.log([1, 2, 4]), np.log(norms[:, deg == m]), 1)[0]
    assert np.allclose(slope, m, rtol=0.01)


@given(arrays(np.float64, 13, elements=st.floats(-3, 3)), st.floats(0.1, 0.8), st.floats(0.05, 0.2))
def test_maximum_principle(c, r1, gap):
    p = HarmonicPoly(BasisSpec(2, 6), c)
    mesh = 0.02
    inner = sup_norm(p, sample_shape(ShapeDescriptor.circle((0, 0), r1), mesh))
    outer = sup_norm(p, sample_shape(ShapeDescriptor.circle((0, 0), r1 + gap), mesh))
    lip = sum(k * (abs(c[2 * k - 1]) + abs(c[2 * k])) for k in range(1, 7))
    assert inner <= outer + lip * mesh


@given(arrays(np.float64, 16, elements=st.floats(-1e3, 1e3)))
def test_json_roundtrip(c):
    p = HarmonicPoly(BasisSpec(3, 3, (1.0, 2.0, 3.0), 0.5), c)
    q = HarmonicPoly.from_json(p.to_json())
    assert q.spec == p.spec and np.array_equal(q.coeffs, p.coeffs)


def test_degree_caps_and_validation():
    BasisSpec(2, 40)
    BasisSpec(3, 20)
    with pytest.raises(BasisError):
        BasisSpec(2, 41)
    with pytest.raises(BasisError):
        BasisSpec(3, 21)
    with pytest.raises(BasisError):
        BasisSpec(4, 1)
    with pytest.raises(BasisError):
        HarmonicPoly(BasisSpec(2, 1), [1.0, 2.0])
    with pytest.raises(BasisError):
        HarmonicPoly(BasisSpec(2, 0), [math.nan])
