"""Empirical two-constants inequality

    ||u||_K <= C ||u||_E^(1 - alpha - eps) ||u||_D^(alpha + eps)

for harmonic polynomials ``u``, with ``K`` inside ``D_alpha = {chi_0 < alpha}``.

Two probes are provided: a seeded random ensemble (:func:`verify_random`)
and an LP adversary (:func:`adversarial_search`) which, for each ``T``,
finds the largest ``|u(y)|`` on ``K`` given ``||u||_E <= 1`` and
``||u||_D <= T``.  Both only ever see polynomials of bounded degree, so they
estimate ``C`` from below; the fitted constant carries an empirical safety
factor.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .chi_measure import ChiParams, ChiSolver
from .geometry import SampledSet
from .harmonic_basis import BasisSpec, eval_basis

SAFETY_FACTOR = 1.5
LIMITATION = (
    "empirical: C is fitted on harmonic polynomials of bounded degree, which may "
    "understate the worst case over all harmonic functions on D"
)


class TwoConstantsError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class TwoConstantsReport:
    alpha: float
    eps: float
    K: SampledSet
    worst_ratio: float
    fitted_C: float
    samples_tested: int
    adversarial_ratio: float = float("nan")
    degree: int = 0
    seed: int = 0
    skipped: int = 0
    ratios: np.ndarray = field(default_factory=lambda: np.zeros(0))
    adversarial_by_t: tuple = ()
    region_max_chi0: float = float("nan")
    notes: str = LIMITATION

    @property
    def exponent(self) -> float:
        return self.alpha + self.eps

    def to_dict(self) -> dict:
        def num(v):
            return None if not math.isfinite(v) else float(v)

        return {
            "alpha": self.alpha,
            "eps": self.eps,
            "K": self.K.label,
            "degree": self.degree,
            "seed": self.seed,
            "worst_ratio": num(self.worst_ratio),
            "fitted_C": num(self.fitted_C),
            "safety_factor": SAFETY_FACTOR,
            "samples_tested": self.samples_tested,
            "skipped": self.skipped,
            "adversarial_ratio": num(self.adversarial_ratio),
            "adversarial_by_t": [[t, num(r)] for t, r in self.adversarial_by_t],
            "region_max_chi0": num(self.region_max_chi0),
            "notes": self.notes,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def ratios_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["sample", "ratio"])
        for i, r in enumerate(self.ratios):
            w.writerow([i, repr(float(r))])
        return buf.getvalue()


def _check(alpha: float, eps: float):
    if not 0 < alpha < 1:
        raise TwoConstantsError("alpha must lie in (0, 1)")
    if not 0 < eps < 1 - alpha:
        raise TwoConstantsError("need 0 < eps < 1 - alpha")


def _domain_spec(D: SampledSet, degree: int) -> BasisSpec:
    # unit scale on D: every basis element is at most 1 in modulus there
    c = D.points.mean(axis=0)
    r = float(np.max(np.linalg.norm(D.points - c, axis=1))) or 1.0
    return BasisSpec(D.dim, degree, tuple(c), r)


def region_check(E: SampledSet, K: SampledSet, D: SampledSet, alpha: float, params: ChiParams | None = None) -> float:
    """Largest chi_0 over the samples of K; warns when it is not below alpha."""
    solver = ChiSolver(E, D, params or ChiParams())
    worst = max(float(solver.chi_eps_values(y)[-1]) for y in K.points)
    if worst >= alpha:
        warnings.warn(
            f"K reaches chi_0 = {worst:.3f} >= alpha = {alpha:g}; K is not inside D_alpha",
            stacklevel=2,
        )
    return worst


def verify_random(
    E: SampledSet,
    K: SampledSet,
    D: SampledSet,
    alpha: float,
    eps: float,
    degree: int,
    n_samples: int,
    seed: int,
    check_region: bool = True,
    chi_params: ChiParams | None = None,
) -> TwoConstantsReport:
    """Ratios ``||u||_K / (||u||_E^(1-a-e) ||u||_D^(a+e))`` over random ``u``.

    Coefficients are i.i.d. standard normal in a basis normalised to the
    unit scale of ``D``.  Samples with ``||u||_E = 0`` are skipped and
    counted.
    """
    _check(alpha, eps)
    if n_samples < 1:
        raise TwoConstantsError("n_samples must be >= 1")
    chi_max = region_check(E, K, D, alpha, chi_params) if check_region else float("nan")
    spec = _domain_spec(D, degree)
    rng = np.random.default_rng(seed)
    U = rng.standard_normal((n_samples, spec.size))
    nE = np.abs(eval_basis(spec, E.points) @ U.T).max(axis=0)
    nK = np.abs(eval_basis(spec, K.points) @ U.T).max(axis=0)
    nD = np.abs(eval_basis(spec, D.points) @ U.T).max(axis=0)
    ok = nE > 1e-14 * nD
    g = alpha + eps
    ratios = nK[ok] / (nE[ok] ** (1 - g) * nD[ok] ** g)
    worst = float(ratios.max()) if len(ratios) else float("nan")
    return TwoConstantsReport(
        alpha, eps, K, worst, SAFETY_FACTOR * worst, int(ok.sum()),
        degree=degree, seed=seed, skipped=int((~ok).sum()), ratios=ratios, region_max_chi0=chi_max,
    )


def adversarial_profile(
    E: SampledSet, K: SampledSet, D: SampledSet, alpha: float, eps: float, degree: int, t_grid
) -> list[tuple[float, float]]:
    """``(T, max_y F_T(y) / T^(alpha+eps))`` for each ``T``, where ``F_T(y)``
    is the LP maximum of ``u(y)`` subject to ``|u| <= 1`` on E and ``|u| <= T``
    on D (``u -> -u`` symmetry covers ``|u(y)|``)."""
    _check(alpha, eps)
    t_grid = [float(t) for t in t_grid]
    if not t_grid or any(t < 1 for t in t_grid):
        raise TwoConstantsError("t_grid values must be >= 1 (u = 1 needs T >= 1)")
    solver = ChiSolver(E, D, ChiParams(surrogate_degree=degree))
    g = alpha + eps
    return [(T, max(solver.peak(y, T) for y in K.points) / T**g) for T in t_grid]


def adversarial_search(E: SampledSet, K: SampledSet, D: SampledSet, alpha: float, eps: float, degree: int, t_grid) -> float:
    """Max over ``T`` of :func:`adversarial_profile`: a lower bound on the
    best constant ``C`` at this degree."""
    return max(r for _, r in adversarial_profile(E, K, D, alpha, eps, degree, t_grid))


def with_adversary(report: TwoConstantsReport, E: SampledSet, D: SampledSet, t_grid) -> TwoConstantsReport:
    """``report`` with the adversarial fields filled in on the same scene."""
    prof = adversarial_profile(E, report.K, D, report.alpha, report.eps, report.degree, t_grid)
    return dataclasses.replace(report, adversarial_ratio=max(r for _, r in prof), adversarial_by_t=tuple(prof))
