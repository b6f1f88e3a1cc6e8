"""Best uniform approximation by harmonic polynomials on sampled sets.

``l_m(f, K)`` is computed as the linear program

    minimize t  subject to  -t <= f(x_i) - sum_j c_j phi_j(x_i) <= t

over the samples ``x_i`` of ``K``.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.spatial import cKDTree

from . import lp_core
from .geometry import SampledSet, resample
from .harmonic_basis import BasisSpec, HarmonicPoly, eval_basis

EXACT_TOL = 1e-9


class ApproximationError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class TargetFunction:
    """A pointwise rule ``(n, dim) array -> (n,) array`` with a label.

    ``kind`` and ``params`` describe built-ins so configurations can name
    them; custom callables use ``kind="custom"``.
    """

    label: str
    evaluator: Callable[[np.ndarray], np.ndarray]
    kind: str = "custom"
    params: dict = field(default_factory=dict)

    def __call__(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        v = np.asarray(self.evaluator(X), dtype=float).reshape(len(X))
        if not np.all(np.isfinite(v)):
            raise ApproximationError(f"target {self.label!r} is not finite on all samples")
        return v


def harmonic_target(p: HarmonicPoly, label: str = "harmonic") -> TargetFunction:
    return TargetFunction(label, p, "harmonic", {"poly": p.to_dict()})


def pole_target(q: float = 2.0) -> TargetFunction:
    """``Re 1/(q - z)`` in the plane; harmonic except at the real point ``q``."""

    def f(X):
        return (1.0 / (q - (X[:, 0] + 1j * X[:, 1]))).real

    return TargetFunction(f"Re 1/({q:g}-z)", f, "pole", {"q": float(q)})


def pole_remainder(q: float = 2.0, degree: int = 12) -> TargetFunction:
    """``Re 1/(q - z)`` minus its Taylor polynomial of degree ``degree`` at 0.

    It is of size ``(|z|/q)^(degree+1)`` near the origin, so it is
    numerically zero on a disk around 0 yet not a polynomial.
    """

    def f(X):
        z = X[:, 0] + 1j * X[:, 1]
        w = z / q
        head = sum(w**k for k in range(degree + 1)) / q
        return (1.0 / (q - z) - head).real

    return TargetFunction(f"Re 1/({q:g}-z) - T_{degree}", f, "pole_remainder", {"q": float(q), "degree": int(degree)})


def zero_target() -> TargetFunction:
    return TargetFunction("0", lambda X: np.zeros(len(X)), "zero", {})


def abs_coordinate(index: int = 0) -> TargetFunction:
    return TargetFunction(f"|x{index + 1}|", lambda X: np.abs(X[:, index]), "abs", {"index": index})


def coordinate(index: int = 0) -> TargetFunction:
    return TargetFunction(f"x{index + 1}", lambda X: X[:, index].copy(), "coordinate", {"index": index})


def constant_target(value: float) -> TargetFunction:
    return TargetFunction(f"{value:g}", lambda X: np.full(len(X), float(value)), "constant", {"value": float(value)})


def table_target(points, values, label: str = "table") -> TargetFunction:
    """Values given on a finite set of points; evaluating elsewhere is an error."""
    pts = np.asarray(points, dtype=float)
    vals = np.asarray(values, dtype=float)
    tree = cKDTree(pts)

    def f(X):
        d, idx = tree.query(X)
        if np.any(d > 1e-12):
            raise ApproximationError(f"table target {label!r} evaluated off its sample points")
        return vals[idx]

    return TargetFunction(label, f, "table", {"n_points": len(pts)})


_BUILTINS = {
    "pole": lambda p: pole_target(p.get("q", 2.0)),
    "pole_remainder": lambda p: pole_remainder(p.get("q", 2.0), p.get("degree", 12)),
    "abs": lambda p: abs_coordinate(p.get("index", 0)),
    "coordinate": lambda p: coordinate(p.get("index", 0)),
    "constant": lambda p: constant_target(p["value"]),
    "zero": lambda p: zero_target(),
    "harmonic": lambda p: harmonic_target(HarmonicPoly.from_dict(p["poly"])),
}
_PARAMS = {
    "pole": {"q"},
    "pole_remainder": {"q", "degree"},
    "abs": {"index"},
    "coordinate": {"index"},
    "constant": {"value"},
    "zero": set(),
    "harmonic": {"poly"},
}


def target_from_spec(kind: str, params: dict | None = None) -> TargetFunction:
    """Built-in target by name, as used in configuration files."""
    params = dict(params or {})
    if kind not in _BUILTINS:
        raise ValueError(f"unknown function kind {kind!r}; expected one of {sorted(_BUILTINS)}")
    extra = set(params) - _PARAMS[kind]
    if extra:
        raise ValueError(f"unknown parameters for {kind!r}: {sorted(extra)}")
    try:
        return _BUILTINS[kind](params)
    except KeyError as exc:
        raise ValueError(f"function {kind!r} needs parameter {exc.args[0]!r}") from None


@dataclass(frozen=True, eq=False)
class ApproxResult:
    degree: int
    poly: HarmonicPoly
    deviation: float
    is_exact: bool = False
    lp_objective: float = float("nan")

    def to_dict(self) -> dict:
        return {
            "m": self.degree,
            "deviation": self.deviation,
            "is_exact": self.is_exact,
            "poly": self.poly.to_dict(),
        }


def _minimax_lp(F: np.ndarray, fv: np.ndarray) -> lp_core.LpSolution:
    n = F.shape[0]
    one = np.ones((n, 1))
    A = np.vstack([np.hstack([-F, -one]), np.hstack([F, -one])])
    b = np.concatenate([-fv, fv])
    c = np.zeros(F.shape[1] + 1)
    c[-1] = -1.0
    return lp_core.maximize(c, A, b)


def best_approx(f: TargetFunction, K: SampledSet, spec: BasisSpec) -> ApproxResult:
    """Best approximation of ``f`` on the samples of ``K`` by harmonic
    polynomials of degree ``<= spec.max_degree``."""
    if K.is_empty:
        raise ApproximationError("cannot approximate on an empty set")
    if spec.dim != K.dim:
        raise ApproximationError(f"{spec.dim}D basis on a {K.dim}D set")
    fv = f(K.points)
    F = eval_basis(spec, K.points)
    sol = _minimax_lp(F, fv)
    if not sol.optimal:
        raise ApproximationError(f"minimax LP returned {sol.status}; the encoding is always feasible and bounded")
    coeffs = sol.x[:-1]
    dev = float(np.max(np.abs(fv - F @ coeffs)))
    return ApproxResult(spec.max_degree, HarmonicPoly(spec, coeffs), dev, dev < EXACT_TOL, -sol.objective_value)


def deviation_sequence(
    f: TargetFunction, K: SampledSet, m_max: int, spec: BasisSpec | None = None
) -> list[ApproxResult]:
    """Best approximations for ``m = 0..m_max``.

    The spaces are nested, so if a solve comes back (numerically) worse than
    its predecessor the predecessor, padded with zero coefficients, is the
    better degree-``m`` answer and is used instead.
    """
    base = spec or BasisSpec(K.dim, m_max)
    out: list[ApproxResult] = []
    for m in range(m_max + 1):
        res = best_approx(f, K, base.with_degree(m))
        if out and res.deviation > out[-1].deviation:
            prev = out[-1]
            res = ApproxResult(m, prev.poly.padded(m), prev.deviation, prev.is_exact, prev.lp_objective)
        out.append(res)
    return out


def deviation_bracket(f: TargetFunction, K: SampledSet, spec: BasisSpec) -> tuple[float, float]:
    """Deviation at ``K``'s mesh and at half that mesh.

    The fine value is the better estimate of the continuum ``l_m``; the
    pair brackets the discretisation bias from below.
    """
    coarse = best_approx(f, K, spec).deviation
    fine = best_approx(f, resample(K), spec).deviation
    return coarse, fine


def results_to_csv(results: list[ApproxResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["m", "deviation"])
    for r in results:
        w.writerow([r.degree, repr(r.deviation)])
    return buf.getvalue()


def results_to_json(results: list[ApproxResult]) -> str:
    return json.dumps([r.to_dict() for r in results], indent=2)
