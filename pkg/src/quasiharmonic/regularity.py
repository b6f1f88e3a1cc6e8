"""Bernstein-ratio probes of H-regularity at a point.

``rho_m = sup ||P||_B / ||P||_{E cap B}`` over harmonic polynomials of degree
``<= m``, with ``B`` the closed ball ``B(x0, r)``.  By the maximum principle
the sup over ``B`` is attained on its boundary sphere, so only samples of the
sphere are used as objective points.  Each of them is one LP
``max P(y) s.t. |P| <= 1 on E cap B``; the sign symmetry ``P -> -P`` makes
the second LP (``max -P(y)``) redundant.

When some nonzero polynomial vanishes on the samples of ``E cap B`` the ratio
is infinite; that case returns a sentinel together with the annihilating
polynomial as a witness.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from . import lp_core
from .geometry import SampledSet, ShapeDescriptor, sample_shape
from .harmonic_basis import BasisSpec, HarmonicPoly, eval_basis, sup_norm

UNBOUNDED_RATIO = math.inf
DEFAULT_THETA = 0.1
NULL_RTOL = 1e-10

REGULAR = "regular_evidence"
IRREGULAR = "irregular_evidence"
ANNIHILATED = "degenerate_annihilated"


class RegularityError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class RatioResult:
    """``rho_m`` with the maximising boundary point, or the witness
    polynomial when the ratio is unbounded."""

    ratio: float
    argmax: tuple | None = None
    witness: HarmonicPoly | None = None

    @property
    def unbounded(self) -> bool:
        return math.isinf(self.ratio)


@dataclass(frozen=True, eq=False)
class RegularityProfile:
    x0: tuple
    r: float
    ratios: list
    growth_estimate: float
    verdict: str
    window: int
    theta: float
    witness: HarmonicPoly | None = None

    @property
    def root_ratios(self) -> list:
        return [rho ** (1.0 / m) for m, rho in enumerate(self.ratios, start=1)]

    def to_dict(self) -> dict:
        return {
            "x0": list(self.x0),
            "r": self.r,
            "ratios": [None if math.isinf(v) else v for v in self.ratios],
            "growth_estimate": None if math.isinf(self.growth_estimate) else self.growth_estimate,
            "verdict": self.verdict,
            "window": self.window,
            "theta": self.theta,
            "witness": None if self.witness is None else self.witness.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["m", "rho_m"])
        for m, v in enumerate(self.ratios, start=1):
            w.writerow([m, "inf" if math.isinf(v) else repr(v)])
        return buf.getvalue()


def ball_points(E: SampledSet, x0, r: float) -> np.ndarray:
    """Samples of ``E`` in the closed ball ``|y - x0| <= r``."""
    x0 = np.asarray(x0, dtype=float)
    d = np.linalg.norm(E.points - x0, axis=1)
    return E.points[d <= r * (1.0 + 1e-12)]


def sphere_samples(x0, r: float, mesh: float) -> np.ndarray:
    """Quasi-uniform samples of the sphere ``|y - x0| = r``."""
    shape = ShapeDescriptor.circle(tuple(float(t) for t in x0), r)
    return sample_shape(shape, mesh).points


class _RatioLp:
    """LP data for one constraint set and degree; warm-started across
    objective points (the reduced costs do not depend on the objective)."""

    def __init__(self, spec: BasisSpec, C: np.ndarray):
        F = eval_basis(spec, C)
        self.spec = spec
        self.F = F
        self.A = np.vstack([F, -F])
        self.b = np.ones(len(self.A))
        self.basis = None

    def null_vector(self) -> np.ndarray | None:
        _, s, Vt = np.linalg.svd(self.F, full_matrices=True)
        rank = int(np.sum(s > NULL_RTOL * s[0]))
        return Vt[-1] if rank < self.F.shape[1] else None

    def max_at(self, y) -> lp_core.LpSolution:
        sol = lp_core.maximize(eval_basis(self.spec, y), self.A, self.b, basis=self.basis)
        if sol.optimal and sol.basis is not None:
            self.basis = sol.basis
        return sol


def _witness(spec: BasisSpec, v: np.ndarray, S: np.ndarray) -> HarmonicPoly:
    p = HarmonicPoly(spec, v)
    return HarmonicPoly(spec, v / sup_norm(p, S))


def bernstein_ratio_result(E: SampledSet, x0, r: float, m: int, mesh: float | None = None) -> RatioResult:
    """``rho_m`` with its argmax or witness; see :func:`bernstein_ratio`."""
    if r <= 0:
        raise RegularityError("r must be > 0")
    x0 = np.asarray(x0, dtype=float)
    if len(x0) != E.dim:
        raise RegularityError("x0 dimension mismatch")
    C = ball_points(E, x0, r)
    if len(C) == 0:
        raise RegularityError("no constraint set: E has no samples in the ball")
    Y = sphere_samples(x0, r, mesh or E.mesh)
    spec = BasisSpec(E.dim, m, tuple(x0), r)
    lp = _RatioLp(spec, C)
    v = lp.null_vector()
    if v is not None:
        return RatioResult(UNBOUNDED_RATIO, witness=_witness(spec, v, Y))
    best, arg = 1.0, None
    for y in Y:
        sol = lp.max_at(y)
        if sol.status == lp_core.UNBOUNDED:
            return RatioResult(UNBOUNDED_RATIO, witness=_witness(spec, sol.ray, Y))
        if not sol.optimal:
            raise RegularityError(f"ratio LP returned {sol.status}")
        if sol.objective_value > best or arg is None:
            best, arg = max(best, sol.objective_value), tuple(float(t) for t in y)
    return RatioResult(float(best), arg)


def bernstein_ratio(E: SampledSet, x0, r: float, m: int, mesh: float | None = None) -> float:
    """Worst ratio ``||P||_B / ||P||_{E cap B}`` over degree ``<= m``.

    ``B = B(x0, r)`` is closed.  The sphere is sampled at ``mesh``
    (default: the mesh of ``E``).  Returns ``inf`` when a nonzero
    polynomial vanishes on the constraint samples.
    """
    return bernstein_ratio_result(E, x0, r, m, mesh).ratio


def regularity_profile(
    E: SampledSet,
    x0,
    r: float,
    m_max: int,
    window: int = 5,
    theta: float = DEFAULT_THETA,
    mesh: float | None = None,
) -> RegularityProfile:
    """``rho_1 .. rho_m_max`` and a verdict from the trailing window of
    ``rho_m^(1/m)``."""
    if m_max < 1:
        raise RegularityError("m_max must be >= 1")
    BasisSpec(E.dim, m_max)  # enforces the degree cap
    if not 1 <= window <= m_max:
        raise RegularityError(f"window must lie in [1, {m_max}]")
    ratios, witness = [], None
    for m in range(1, m_max + 1):
        res = bernstein_ratio_result(E, x0, r, m, mesh)
        if res.unbounded:
            # larger families contain the witness too
            witness = res.witness
            ratios.extend([UNBOUNDED_RATIO] * (m_max - m + 1))
            break
        # nested families: the ratio cannot decrease with m
        ratios.append(max(res.ratio, ratios[-1]) if ratios else res.ratio)
    roots = [rho ** (1.0 / m) for m, rho in enumerate(ratios, start=1)]
    growth = max(roots[m_max - window:])
    if witness is not None:
        verdict = ANNIHILATED
    elif growth <= 1.0 + theta:
        verdict = REGULAR
    else:
        verdict = IRREGULAR
    return RegularityProfile(
        tuple(float(t) for t in x0), float(r), ratios, float(growth), verdict, window, theta, witness
    )


def radius_profiles(E: SampledSet, x0, r: float, m_max: int, window: int = 5, **kw) -> list[RegularityProfile]:
    """Profiles for ``r, r/2, r/4`` (the definition lets the radius shrink)."""
    return [regularity_profile(E, x0, r / 2**k, m_max, window, **kw) for k in range(3)]
