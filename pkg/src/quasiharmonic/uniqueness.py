"""Numerical walk through the uniqueness argument for quasiharmonic ``f``.

Given ``f`` on ``K`` and its (numerical) zero set ``E``, the chain is:

1. best approximants ``p_m`` of ``f`` on ``K`` and the decay rate ``d``
   of ``||f - p_m||_K^(1/m)``;
2. ``||p_m||_E <= ||f - p_m||_K`` since ``f = 0`` on ``E``;
3. ``||p_m||_K <= 1 + ||f||_K`` once the deviation is below 1;
4. growth from ``K`` to ``U_delta`` bounded by ``M b^m`` (H-regularity of K);
5. ``chi_0(., E, U_delta) != 1`` (E is not negligible);
6. the two-constants inequality on ``U`` inside ``{chi_0 < alpha}``
   which, combined with 2-4, forces ``||p_m||_U`` to decay like
   ``L (d + eps)^(m (1 - 2 (alpha + beta)))``.

Each step is measured, and the verdict is evidence at desk scale, never a
proof.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import rates
from .chi_measure import ChiParams, chi_field, is_null_chi
from .geometry import Scene, SampledSet, delta_neighborhood, distances
from .harmonic_basis import sup_norm
from .minimax import TargetFunction, deviation_sequence
from .regularity import REGULAR, regularity_profile
from .two_constants import verify_random

IDENTICALLY_ZERO = "f_identically_zero_evidence"
HYPOTHESES_NOT_MET = "hypotheses_not_met"
INCONCLUSIVE = "inconclusive"

SLOPE_SLACK = 0.2
QH_CLASSES = (rates.HARMONICALLY_EXTENDABLE, rates.QUASIHARMONIC_ONLY, rates.EXACTLY_POLYNOMIAL)


class UniquenessError(ValueError):
    pass


@dataclass(frozen=True)
class UniquenessConfig:
    """Parameters of the chain.

    ``b`` and ``eps_margin`` default (``None``) to values derived from the
    measured decay rate: ``eps_margin = 0.1 (1 - d)`` and
    ``b = (d + eps)^(-1/2)``, the geometric midpoint of ``(1, 1/(d+eps))``.
    """

    delta: float = 0.1
    b: float | None = None
    alpha: float = 0.2
    beta: float = 0.2
    eps_margin: float | None = None
    m_max: int = 20
    surrogate_degree: int = 12
    window: int = 6
    chi_grid: int = 12
    regularity_degree: int = 10
    two_constants_samples: int = 200
    seed: int = 0
    udelta_mesh: float | None = None

    def __post_init__(self):
        if not self.delta > 0:
            raise UniquenessError("delta must be > 0")
        if not (0 < self.alpha < 1 and 0 < self.beta < 1 - self.alpha):
            raise UniquenessError("need 0 < alpha < 1 and 0 < beta < 1 - alpha")
        if not self.alpha + self.beta < 0.5:
            raise UniquenessError("alpha + beta < 1/2 is required")
        if self.b is not None and not self.b > 1:
            raise UniquenessError("b must be > 1")
        if self.eps_margin is not None and not 0 < self.eps_margin < 1:
            raise UniquenessError("eps_margin must lie in (0, 1)")
        if self.m_max < 3 or self.window < 3 or self.window > self.m_max:
            raise UniquenessError("need m_max >= 3 and 3 <= window <= m_max")

    @property
    def gamma(self) -> float:
        return self.alpha + self.beta


@dataclass(frozen=True)
class ChainRecord:
    m: int
    dev_K: float
    norm_E: float
    norm_K: float
    norm_Udelta: float
    norm_U: float
    norm_U_measured: float
    predicted_bound: float


@dataclass(frozen=True, eq=False)
class UniquenessReport:
    records: list
    d_estimate: float
    hypothesis_checks: dict
    conclusion: str
    eps_margin: float = float("nan")
    b: float = float("nan")
    M: float = float("nan")
    C: float = float("nan")
    L: float = float("nan")
    norm_U_slope: float = float("nan")
    predicted_slope: float = float("nan")
    f_bound_U: float = float("nan")
    U_coverage: float = float("nan")
    eq5_holds: bool = True
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        def num(v):
            if isinstance(v, float) and not math.isfinite(v):
                return None if math.isnan(v) else ("-inf" if v < 0 else "inf")
            return v

        return {
            "conclusion": self.conclusion,
            "d_estimate": num(self.d_estimate),
            "eps_margin": num(self.eps_margin),
            "b": num(self.b),
            "M": num(self.M),
            "C": num(self.C),
            "L": num(self.L),
            "norm_U_slope": num(self.norm_U_slope),
            "predicted_slope": num(self.predicted_slope),
            "f_bound_U": num(self.f_bound_U),
            "U_coverage": num(self.U_coverage),
            "eq5_holds": self.eq5_holds,
            "hypothesis_checks": self.hypothesis_checks,
            "notes": list(self.notes),
            "records": [{k: num(v) for k, v in asdict(r).items()} for r in self.records],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def chain_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        names = list(ChainRecord.__dataclass_fields__)
        w.writerow(names)
        for r in self.records:
            w.writerow([r.m] + [repr(float(getattr(r, k))) for k in names[1:]])
        return buf.getvalue()

    def to_svg(self) -> str:
        ms = [r.m for r in self.records]
        return rates.semilog_svg(
            {
                "norm_U": (ms, [r.norm_U for r in self.records]),
                "predicted": (ms, [r.predicted_bound for r in self.records]),
                "dev_K": (ms, [r.dev_K for r in self.records]),
            },
            "two-constants bound on U",
        )


def _regularity_point(K: SampledSet) -> np.ndarray:
    c = K.points.mean(axis=0)
    return K.points[int(np.argmin(np.linalg.norm(K.points - c, axis=1)))]


def _k_radius(K: SampledSet, x0) -> float:
    return float(np.max(np.linalg.norm(K.points - x0, axis=1)))


def run_pipeline(f: TargetFunction, scene: Scene, cfg: UniquenessConfig) -> UniquenessReport:
    """Run the chain on ``scene`` (``E`` the zero set of ``f`` inside ``K``)."""
    K, E = scene.K, scene.E
    notes: list[str] = []

    # (a) approximants and the decay rate
    approx = deviation_sequence(f, K, cfg.m_max)
    devs = [a.deviation for a in approx]
    decay = rates.classify(devs, cfg.window, exact_tol=1e-9)
    d = 0.0 if decay.classification == rates.EXACTLY_POLYNOMIAL else decay.liminf_estimate
    checks = {"qh_class": decay.classification, "E_nonnull_chi": None, "K_regular_evidence": None}
    if d >= 1 or decay.classification not in QH_CLASSES:
        notes.append(f"f does not look quasiharmonic on K (d_estimate = {d:.4g})")
        return UniquenessReport([], d, checks, HYPOTHESES_NOT_MET, notes=notes)

    eps = cfg.eps_margin if cfg.eps_margin is not None else 0.1 * (1.0 - d)
    if not 0 < eps < 1 - d:
        raise UniquenessError(f"eps_margin {eps:g} must lie in (0, 1 - d) = (0, {1 - d:.4g})")
    q = d + eps
    b = cfg.b if cfg.b is not None else math.sqrt(1.0 / q)
    if b >= 1.0 / q:
        raise UniquenessError(f"b = {b:g} must be below 1/(d + eps) = {1.0 / q:.4g}")

    # (b), (c) norms on E and K
    fK = float(np.max(np.abs(f(K.points))))
    norm_E = [sup_norm(a.poly, E) for a in approx]
    norm_K = [sup_norm(a.poly, K) for a in approx]
    below = [m for m, v in enumerate(devs) if v < 1]
    eq5 = all(norm_K[m] <= (1 + fK) * (1 + 1e-9) for m in range(below[0], cfg.m_max + 1)) if below else False
    if not eq5:
        notes.append("||p_m||_K <= 1 + ||f||_K fails past the first deviation below 1")

    # (d) growth from K to U_delta; M is fitted for the configured b
    Ud = delta_neighborhood(K, cfg.delta, cfg.udelta_mesh or K.mesh)
    norm_Ud = [sup_norm(a.poly, Ud) for a in approx]
    growth = [u / k / b**m for m, (u, k) in enumerate(zip(norm_Ud, norm_K)) if k > 0]
    M = max(growth) if growth else 1.0
    x0 = _regularity_point(K)
    reg = regularity_profile(K, x0, 0.5 * _k_radius(K, x0), min(cfg.regularity_degree, cfg.m_max), window=3)
    checks["K_regular_evidence"] = reg.verdict

    # (e) E must not be negligible in U_delta
    params = ChiParams(surrogate_degree=cfg.surrogate_degree)
    field_ = chi_field(cfg.chi_grid, E, Ud, params)
    null = is_null_chi(E, Ud, params, field=field_)
    checks["E_nonnull_chi"] = not (null.is_null or null.annihilating)
    if null.annihilating:
        notes.append("E appears polar / N-set-like: a nonzero polynomial vanishes on its samples")

    if not (checks["E_nonnull_chi"] and reg.verdict == REGULAR):
        return UniquenessReport([], d, checks, HYPOTHESES_NOT_MET, eps, b, M, eq5_holds=eq5, notes=notes)

    # (f) U: grid points near K inside the alpha-sublevel of chi_0
    near = distances(field_.grid.points, K) < 0.5 * cfg.delta
    U = field_.grid.subset(near & (field_.chi0 < cfg.alpha), "U")
    if U.is_empty:
        notes.append("no grid point of the delta/2-neighbourhood of K has chi_0 < alpha")
        return UniquenessReport([], d, checks, INCONCLUSIVE, eps, b, M, eq5_holds=eq5, notes=notes)
    # the two-constants display is read with D := U_delta, as the context implies
    tc = verify_random(E, U, Ud, cfg.alpha, cfg.beta, cfg.m_max, cfg.two_constants_samples, cfg.seed,
                       check_region=False)
    C = tc.fitted_C
    g = cfg.gamma
    L = C * M**g * (1 + fK) ** g
    records = []
    for m, a in enumerate(approx):
        norm_U = C * norm_E[m] ** (1 - g) * norm_Ud[m] ** g
        records.append(ChainRecord(
            m, devs[m], norm_E[m], norm_K[m], norm_Ud[m], norm_U,
            sup_norm(a.poly, U), L * q ** (m * (1 - 2 * g)),
        ))

    # (g) verdict from the trailing window
    tail = records[cfg.m_max - cfg.window + 1:]
    vals = [r.norm_U for r in tail]
    if all(v <= 1e-300 for v in vals):
        slope = -math.inf
    else:
        slope = rates.log_linear_slope([r.m for r in tail], vals)
    predicted = (1 - 2 * g) * math.log(q)
    f_bound_U = records[-1].norm_U + records[-1].dev_K
    cover = float(np.mean(distances(K.points, U) <= 0.5 * U.mesh + 1e-12))
    conclusion = IDENTICALLY_ZERO if slope <= predicted * (1 - SLOPE_SLACK) else INCONCLUSIVE
    if conclusion == INCONCLUSIVE:
        notes.append(f"norm_U slope {slope:.4g} is not below the predicted {predicted:.4g} with slack")
    return UniquenessReport(
        records, d, checks, conclusion, eps, b, M, C, L, slope, predicted, f_bound_U, cover, eq5, notes
    )
