import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from quasiharmonic.geometry import ShapeDescriptor, sample_shape
from quasiharmonic.harmonic_basis import BasisError, BasisSpec, HarmonicPoly, eval_basis
from quasiharmonic.minimax import (
    ApproximationError,
    TargetFunction,
    abs_coordinate,
    best_approx,
    constant_target,
    deviation_bracket,
    deviation_sequence,
    harmonic_target,
    pole_remainder,
    pole_target,
    results_to_csv,
    results_to_json,
    table_target,
    target_from_spec,
)


def monomial(m, imag=False):
    spec = BasisSpec(2, m)
    c = np.zeros(spec.size)
    c[2 * m - 1 + imag] = 1.0
    return HarmonicPoly(spec, c)


def test_exact_degree_3(unit_disk, rng):
    p = HarmonicPoly(BasisSpec(2, 3), rng.standard_normal(7))
    res = best_approx(harmonic_target(p), unit_disk, BasisSpec(2, 3))
    assert res.deviation < 1e-9 and res.is_exact


def test_constant(unit_disk):
    res = best_approx(constant_target(7.0), unit_disk, BasisSpec(2, 0))
    assert res.deviation < 1e-12
    assert res.poly.coeffs == pytest.approx([7.0], abs=1e-12)


@pytest.mark.parametrize("m", [2, 5, 8])
def test_chebyshev_on_segment(m):
    # on the real axis Re z^(m+1) = x^(m+1); its least deviation from lower
    # degree is 2^-m (Chebyshev)
    S = sample_shape(ShapeDescriptor.segment((-1, 0), (1, 0)), 0.005)
    dev = best_approx(harmonic_target(monomial(m + 1)), S, BasisSpec(2, m)).deviation
    assert dev <= 2.0**-m * (1 + 1e-9)
    assert dev == pytest.approx(2.0**-m, rel=1e-3)


@pytest.mark.parametrize("m", [4, 8, 10])
def test_pole_below_complex_bound(unit_disk, m):
    # Re of the complex best approximant of 1/(2-z) is a competitor with
    # error 1/(2^m (2^2 - 1))
    dev = best_approx(pole_target(2.0), unit_disk, BasisSpec(2, m)).deviation
    assert dev <= 1 / (3 * 2**m) * (1 + 1e-9)


def test_pole_refinement_oracle():
    K = sample_shape(ShapeDescriptor.disk((0, 0), 1.0), 0.05)
    coarse, fine = deviation_bracket(pole_target(2.0), K, BasisSpec(2, 10))
    assert coarse <= fine * (1 + 1e-9)
    assert abs(coarse - fine) <= 0.05 * fine


def test_exact_sequence_stays_exact(unit_disk, rng):
    p = HarmonicPoly(BasisSpec(2, 3), rng.standard_normal(7))
    devs = [r.deviation for r in deviation_sequence(harmonic_target(p), unit_disk, 8)]
    assert all(d > 1e-6 for d in devs[:3])
    assert all(d < 1e-9 for d in devs[3:])


def test_abs_bounded_below_by_mean_value(unit_disk):
    # p(0) equals the circle mean of p, so |x1| - p cannot be below 1/pi
    # uniformly; deviations stay positive and approach that bound
    devs = [r.deviation for r in deviation_sequence(abs_coordinate(0), unit_disk, 20)]
    boundary = sample_shape(ShapeDescriptor.circle((0, 0), 1.0), unit_disk.mesh)
    circle_mean = np.abs(boundary.points[:, 0]).mean()
    assert min(devs) >= circle_mean / 2 - 1e-9
    assert devs[20] == pytest.approx(1 / math.pi, rel=0.01)
    assert all(b <= a + 1e-10 for a, b in zip(devs, devs[1:]))


@pytest.mark.xfail(strict=True, reason="l_m(|x1|) tends to 1/pi > 0, so l_2m/l_m tends to 1")
@pytest.mark.parametrize("m", [5, 10])
def test_abs_halving_ratio_example(unit_disk, m):
    devs = [r.deviation for r in deviation_sequence(abs_coordinate(0), unit_disk, 2 * m)]
    assert 0.3 <= devs[2 * m] / devs[m] <= 0.8


def test_deviation_is_residual_sup(unit_disk):
    f = pole_target(2.0)
    for res in deviation_sequence(f, unit_disk, 6):
        resid = np.abs(f(unit_disk.points) - res.poly(unit_disk.points)).max()
        assert res.deviation == pytest.approx(resid, abs=1e-10)


def test_monotone_in_set(unit_disk):
    f = abs_coordinate(0)
    small = unit_disk.subset(np.linalg.norm(unit_disk.points, axis=1) <= 0.6, "small")
    for m in (2, 5, 9):
        spec = BasisSpec(2, m)
        assert best_approx(f, small, spec).deviation <= best_approx(f, unit_disk, spec).deviation + 1e-10


def test_optimality_certificate(unit_disk):
    f = pole_target(2.0)
    res = best_approx(f, unit_disk, BasisSpec(2, 5))
    F, fv = eval_basis(res.poly.spec, unit_disk.points), f(unit_disk.points)
    for j in range(len(res.poly.coeffs)):
        for h in (1e-4, -1e-4):
            c = res.poly.coeffs.copy()
            c[j] += h
            assert np.abs(fv - F @ c).max() >= res.deviation - 1e-9


def test_translation_equivariance(unit_disk):
    shift = np.array([3.0, -1.5])
    f = pole_target(2.0)
    g = TargetFunction("shifted", lambda X: f(X - shift))
    moved = unit_disk.translated(shift)
    for m in (3, 7):
        a = best_approx(f, unit_disk, BasisSpec(2, m)).deviation
        b = best_approx(g, moved, BasisSpec(2, m, tuple(shift))).deviation
        assert a == pytest.approx(b, abs=1e-9)


@given(st.integers(0, 8), st.integers(0, 2**32 - 1))
def test_random_harmonic_recovered(m, seed):
    K = sample_shape(ShapeDescriptor.disk((0, 0), 1.0), 0.2)
    p = HarmonicPoly(BasisSpec(2, m), np.random.default_rng(seed).standard_normal(2 * m + 1))
    assert best_approx(harmonic_target(p), K, BasisSpec(2, m)).deviation < 1e-8


@given(arrays(np.float64, 7, elements=st.floats(-5, 5)))
def test_remainder_is_tiny_near_origin(c):
    f = pole_remainder(2.0, 12)
    X = sample_shape(ShapeDescriptor.disk((0, 0), 0.25), 0.05).points
    assert np.abs(f(X)).max() < (0.25 / 2) ** 13 * 2


def test_3d_exact():
    K = sample_shape(ShapeDescriptor.disk((0, 0, 0), 1.0), 0.25)
    p = HarmonicPoly(BasisSpec(3, 2), np.arange(9.0))
    assert best_approx(harmonic_target(p), K, BasisSpec(3, 2)).deviation < 1e-9


def test_errors(unit_disk):
    with pytest.raises(BasisError):
        deviation_sequence(pole_target(), unit_disk, 41)
    with pytest.raises(ApproximationError):
        best_approx(pole_target(), unit_disk, BasisSpec(3, 2))
    t = table_target(unit_disk.points[:3], [1.0, 2.0, 3.0])
    with pytest.raises(ApproximationError):
        t(np.array([[9.0, 9.0]]))
    with pytest.raises(ValueError):
        target_from_spec("nope")
    with pytest.raises(ValueError):
        target_from_spec("pole", {"r": 1})
    with pytest.raises(ApproximationError):
        TargetFunction("bad", lambda X: np.full(len(X), np.nan))(unit_disk.points)


def test_table_target(unit_disk):
    vals = np.arange(len(unit_disk), dtype=float)
    t = table_target(unit_disk.points, vals)
    assert np.array_equal(t(unit_disk.points), vals)


def test_exports(unit_disk):
    res = deviation_sequence(constant_target(2.0), unit_disk, 2)
    csv = results_to_csv(res)
    assert csv.splitlines()[0] == "m,deviation" and len(csv.splitlines()) == 4
    doc = json.loads(results_to_json(res))
    assert [d["m"] for d in doc] == [0, 1, 2]
    assert HarmonicPoly.from_dict(doc[2]["poly"]).coeffs[0] == pytest.approx(2.0)
