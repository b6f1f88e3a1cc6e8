import csv
import io
import json
import math

import numpy as np
import pytest

from quasiharmonic import cli
from quasiharmonic.geometry import Scene, ShapeDescriptor, sample_shape
from quasiharmonic.minimax import coordinate, zero_target
from quasiharmonic.uniqueness import (
    HYPOTHESES_NOT_MET,
    IDENTICALLY_ZERO,
    UniquenessConfig,
    UniquenessError,
    run_pipeline,
)

SMALL = dict(m_max=8, window=3, chi_grid=8, surrogate_degree=6, two_constants_samples=50, udelta_mesh=0.1)


def bundled(name):
    p = cli.prepare("uniqueness", cli.load_config(cli.bundled_path(name)))
    return p.function, p.scene, UniquenessConfig(**p.section, seed=p.seed)


@pytest.fixture(scope="module")
def positive():
    f, scene, cfg = bundled("uniqueness_positive")
    return f, scene, cfg, run_pipeline(f, scene, cfg)


@pytest.fixture(scope="module")
def small_sets():
    K = sample_shape(ShapeDescriptor.disk((0, 0), 1.0), 0.05, "K")
    D = sample_shape(ShapeDescriptor.disk((0, 0), 1.5), 0.15, "D")
    return K, D


def test_config_validation():
    with pytest.raises(UniquenessError, match="1/2"):
        UniquenessConfig(alpha=0.3, beta=0.25)
    with pytest.raises(UniquenessError):
        UniquenessConfig(b=1.0)
    with pytest.raises(UniquenessError):
        UniquenessConfig(eps_margin=1.5)
    with pytest.raises(UniquenessError):
        UniquenessConfig(delta=0)
    with pytest.raises(UniquenessError):
        UniquenessConfig(m_max=5, window=6)
    assert UniquenessConfig().gamma == pytest.approx(0.4)


def test_zero_function(small_sets):
    K, D = small_sets
    rep = run_pipeline(zero_target(), Scene(K, K, D, 0.1), UniquenessConfig(**SMALL))
    assert rep.conclusion == IDENTICALLY_ZERO
    for r in rep.records:
        assert (r.dev_K, r.norm_E, r.norm_K, r.norm_Udelta, r.norm_U, r.norm_U_measured) == (0, 0, 0, 0, 0, 0)
    assert rep.f_bound_U == 0.0


def test_negative_control(small_sets):
    K, D = small_sets
    f = coordinate(0)
    E = K.subset(np.abs(f(K.points)) < 1e-12, "E")
    rep = run_pipeline(f, Scene(K, E, D, 0.1), UniquenessConfig(**SMALL))
    assert rep.conclusion == HYPOTHESES_NOT_MET
    assert rep.hypothesis_checks["E_nonnull_chi"] is False
    assert any("polar / N-set-like" in n for n in rep.notes)


def test_b_must_stay_below_inverse_rate(small_sets):
    K, D = small_sets
    f = coordinate(0)
    E = K.subset(np.abs(f(K.points)) < 1e-12, "E")
    with pytest.raises(UniquenessError, match="b ="):
        run_pipeline(f, Scene(K, E, D, 0.1), UniquenessConfig(**SMALL, b=50.0))


def test_positive_verdict(positive):
    *_, rep = positive
    assert rep.conclusion == IDENTICALLY_ZERO
    assert all(v for k, v in rep.hypothesis_checks.items() if k != "qh_class")
    assert rep.norm_U_slope <= rep.predicted_slope * 0.8


def test_chain_norm_E_below_dev_K(positive):
    f, scene, _, rep = positive
    f_on_E = np.abs(f(scene.E.points)).max()
    for r in rep.records:
        assert r.norm_E <= r.dev_K + f_on_E + 1e-12


def test_chain_K_bound(positive):
    f, scene, _, rep = positive
    fK = np.abs(f(scene.K.points)).max()
    first = next(r.m for r in rep.records if r.dev_K < 1)
    assert rep.eq5_holds
    for r in rep.records[first:]:
        assert r.norm_K <= 1 + fK + 1e-9


def test_chain_growth_bound(positive):
    *_, rep = positive
    for r in rep.records:
        assert r.norm_Udelta <= rep.M * rep.b**r.m * r.norm_K * (1 + 1e-9)


def test_two_constants_bound_on_U(positive):
    *_, rep = positive
    # the measured ||p_m||_U never exceeds the two-constants product
    for r in rep.records:
        assert r.norm_U_measured <= r.norm_U * (1 + 1e-9)


def test_soundness_and_pole_oracle(positive):
    f, scene, _, rep = positive
    fK = np.abs(f(scene.K.points)).max()
    assert rep.f_bound_U < 1e-3 * (1 + fK)
    # direct evaluation: f is tiny on K near the origin, and the reported
    # bound holds there
    assert rep.f_bound_U < 10 * rep.records[12].dev_K


def test_deterministic(positive):
    f, scene, cfg, rep = positive
    again = run_pipeline(f, scene, cfg)
    assert again.to_json() == rep.to_json()
    assert again.chain_csv() == rep.chain_csv()


def test_exports(positive):
    *_, rep = positive
    d = json.loads(rep.to_json())
    assert d["conclusion"] == IDENTICALLY_ZERO and len(d["records"]) == 21
    rows = list(csv.reader(io.StringIO(rep.chain_csv())))
    assert rows[0][:3] == ["m", "dev_K", "norm_E"] and len(rows) == 22
    assert rep.to_svg().startswith("<svg")
    assert math.isfinite(d["norm_U_slope"])
