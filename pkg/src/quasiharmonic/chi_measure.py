"""Extremal function chi_eps(x, E, D) and its small-eps limit chi_0.

For a point ``x`` and ``0 < alpha < eps``

    chi_eps(x) = sup alpha * ln|u(x)|,   ||u||_E <= 1,  ||u||_D <= e^(1/alpha),

where ``u`` runs over harmonic polynomials of degree ``<= N`` (the
surrogate for all harmonic functions on ``D``).  With
``F(T) = max u(x)`` subject to ``|u| <= 1`` on ``E`` and ``|u| <= T`` on
``D`` this is ``max_alpha alpha * ln F(e^(1/alpha))``.  The constraints are
symmetric under ``u -> -u``, so one LP per ``alpha`` covers both signs.

Large ``T`` is numerically hopeless in double precision, so direct solves
stop at ``t_max``.  Beyond it ``F(T) >= max(F(t_max), a T)`` where ``a`` is
the largest ``v(x)`` over polynomials vanishing on ``E`` with ``|v| <= 1`` on
``D``; that lower bound is exact in the two regimes that matter (``a = 0``
once ``D`` no longer binds, ``F ~ a T`` when ``E`` annihilates polynomials).
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull

from . import lp_core
from .geometry import SampledSet, distances, grid_in
from .harmonic_basis import BasisSpec, eval_basis

ALPHA_FLOOR = 1.0 / 700.0
NULL_RTOL = 1e-10
CUT_TOL = 1e-9


class ChiError(RuntimeError):
    pass


@dataclass(frozen=True)
class ChiParams:
    epsilon_grid: tuple = (0.4, 0.3, 0.2)
    alpha_per_epsilon: int = 4
    surrogate_degree: int = 12
    tolerance: float = 0.01
    t_max: float = 1e10

    def __post_init__(self):
        eps = tuple(float(e) for e in self.epsilon_grid)
        if not eps or any(not 0 < e < 1 for e in eps):
            raise ValueError("epsilon values must lie in (0, 1)")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ValueError("epsilon_grid must be strictly decreasing")
        if self.surrogate_degree < 1:
            raise ValueError("surrogate_degree must be >= 1")
        if self.alpha_per_epsilon < 1:
            raise ValueError("alpha_per_epsilon must be >= 1")
        object.__setattr__(self, "epsilon_grid", eps)

    def with_degree(self, N: int) -> ChiParams:
        return ChiParams(self.epsilon_grid, self.alpha_per_epsilon, N, self.tolerance, self.t_max)


def alpha_grid(eps: float, count: int) -> np.ndarray:
    """Geometric grid between ``max(eps/64, 1/700)`` and ``eps (1 - 1/64)``."""
    lo = max(eps / 64.0, ALPHA_FLOOR)
    hi = eps * (1.0 - 1.0 / 64.0)
    if count == 1:
        return np.array([hi])
    return np.geomspace(lo, hi, count)


def _adapted_spec(E: SampledSet, D: SampledSet, N: int) -> BasisSpec:
    # centred on E; the scale is the geometric mean of the E and D radii so
    # high-degree columns are neither negligible on E nor huge on D
    c = E.points.mean(axis=0)
    rD = float(np.max(np.linalg.norm(D.points - c, axis=1))) or 1.0
    rE = float(np.max(np.linalg.norm(E.points - c, axis=1)))
    r = math.sqrt(max(rE, 1e-3 * rD) * rD)
    return BasisSpec(E.dim, N, tuple(c), r)


class ChiSolver:
    """Precomputed LP data for one ``(E, D, N)`` triple.

    Harmonic polynomials take their maximum over ``D`` near its boundary,
    so the ``D`` constraints start from the samples close to the hull
    boundary and grow (cutting planes) whenever a solution violates the bound
    at some other sample.  Every returned optimum satisfies all of them.
    """

    def __init__(self, E: SampledSet, D: SampledSet, params: ChiParams):
        if E.dim != D.dim:
            raise ChiError("E and D have different dimensions")
        if E.is_empty or D.is_empty:
            raise ChiError("E and D must be nonempty")
        self.E, self.D, self.params = E, D, params
        self.spec = _adapted_spec(E, D, params.surrogate_degree)
        self.FE = eval_basis(self.spec, E.points)
        self.FD = eval_basis(self.spec, D.points)
        self.nE = len(self.FE)
        self.active = _initial_rows(D)
        self._build()
        # polynomials (numerically) vanishing on the samples of E
        _, s, Vt = np.linalg.svd(self.FE, full_matrices=True)
        rank = int(np.sum(s > NULL_RTOL * s[0])) if len(s) else 0
        self.null_basis = Vt[rank:].T
        self.A_null = np.vstack([self.FD @ self.null_basis, -(self.FD @ self.null_basis)])
        self.eps = np.array(params.epsilon_grid)
        grids = [alpha_grid(e, params.alpha_per_epsilon) for e in self.eps]
        self.alphas = np.unique(np.concatenate(grids))[::-1]
        # alpha index k counts toward eps_i when it lies on the grid of some eps_j <= eps_i
        self.owner = np.zeros((len(self.eps), len(self.alphas)), dtype=bool)
        for j, g in enumerate(grids):
            hit = np.isin(self.alphas, g)
            for i in range(len(self.eps)):
                if self.eps[j] <= self.eps[i]:
                    self.owner[i] |= hit
        # optimal bases of the last point, per alpha: reduced costs do not
        # depend on the objective, so they seed the next point's solves
        self._seed: dict = {}

    def _build(self):
        FW = self.FD[self.active]
        self.A = np.vstack([self.FE, -self.FE, FW, -FW])

    def _grow(self, new):
        # rows are [E+, E-, W+, W-]; appending to W shifts the W- block
        w_old = len(self.active)
        self.active = np.concatenate([self.active, new])
        shift = len(new)
        lim = 2 * self.nE + w_old

        def remap(basis):
            return None if basis is None else tuple(k + shift if k >= lim else k for k in basis)

        self._seed = {k: remap(v) for k, v in self._seed.items()}
        self._build()
        return remap

    @property
    def annihilating(self) -> bool:
        return self.null_basis.shape[1] > 0

    @property
    def nD(self) -> int:
        return len(self.FD)

    def bounds(self, T: float) -> np.ndarray:
        return np.concatenate([np.ones(2 * self.nE), np.full(2 * len(self.active), T)])

    def annihilation_amplitude(self, c: np.ndarray) -> float:
        if not self.annihilating:
            return 0.0
        cz = c @ self.null_basis
        if np.abs(cz).max() < 1e-14:
            return 0.0
        sol = lp_core.maximize(cz, self.A_null, np.ones(len(self.A_null)))
        if sol.status != lp_core.OPTIMAL:
            raise ChiError(f"annihilation LP returned {sol.status}: D samples do not bound the polynomials")
        return max(sol.objective_value, 0.0)

    def alpha_values(self, x) -> np.ndarray:
        """``alpha * ln F(e^(1/alpha))`` on the merged alpha grid, floored at 0."""
        c = eval_basis(self.spec, np.asarray(x, dtype=float))
        log_t_max = math.log(self.params.t_max)
        a = self.annihilation_amplitude(c)
        out = np.zeros(len(self.alphas))
        basis = None
        logF_cap = None
        # alphas are in decreasing order, so T increases and warm starts apply
        for k, al in enumerate(self.alphas):
            logT = 1.0 / al
            if logT <= log_t_max:
                sol = self._solve(c, math.exp(logT), k, basis)
                logF = self._log_value(sol)
                basis = sol.basis
            else:
                if logF_cap is None:
                    sol = self._solve(c, self.params.t_max, k, basis)
                    logF_cap = self._log_value(sol)
                    basis = sol.basis
                logF = logF_cap
                if a > 0:
                    logF = max(logF, logT + math.log(a))
            out[k] = max(al * logF, 0.0)
        return out

    def _solve(self, c, T, k, basis):
        # the previous point's basis at this alpha needs a repair; the
        # previous alpha's basis at this point is feasible outright
        seed = [self._seed.get(k), basis]
        while True:
            sol = lp_core.maximize(c, self.A, self.bounds(T), basis=seed)
            if sol.optimal:
                u = self.FD @ sol.x
                bad = np.abs(u) > T * (1.0 + CUT_TOL)
            elif sol.status == lp_core.UNBOUNDED:
                bad = np.abs(self.FD @ sol.ray) > NULL_RTOL
            else:
                return sol
            bad[self.active] = False
            new = np.flatnonzero(bad)
            if len(new) == 0:
                break
            seed = self._grow(new)(sol.basis)
        if sol.basis is not None:
            self._seed[k] = sol.basis
        return sol

    def peak(self, x, T: float) -> float:
        """``max u(x)`` over ``|u| <= 1`` on E and ``|u| <= T`` on D
        (``inf`` if unbounded)."""
        sol = self._solve(eval_basis(self.spec, np.asarray(x, dtype=float)), float(T), ("T", float(T)), None)
        if sol.status == lp_core.UNBOUNDED:
            return math.inf
        if not sol.optimal:
            raise ChiError(f"peak LP returned {sol.status}")
        return float(sol.objective_value)

    @staticmethod
    def _log_value(sol) -> float:
        if sol.status == lp_core.UNBOUNDED:
            raise ChiError("chi LP unbounded: the D samples do not bound degree-N polynomials")
        if sol.status != lp_core.OPTIMAL:
            raise ChiError(f"chi LP returned {sol.status}")
        # u = 1 is feasible, so the optimum is >= 1 up to rounding
        return math.log(max(sol.objective_value, 1e-300))

    def chi_eps_values(self, x) -> np.ndarray:
        """chi_eps(x) for every eps of the grid (same order as ``epsilon_grid``)."""
        v = self.alpha_values(x)
        return np.array([v[self.owner[i]].max() for i in range(len(self.eps))])


def _initial_rows(D: SampledSet) -> np.ndarray:
    # samples within two meshes of the hull boundary (all of them if the
    # hull is degenerate)
    try:
        eq = ConvexHull(D.points).equations
    except Exception:
        return np.arange(len(D))
    depth = -(D.points @ eq[:, :-1].T + eq[:, -1]).max(axis=1)
    return np.flatnonzero(depth <= 2.0 * D.mesh)


def chi_eps_at(x, E: SampledSet, D: SampledSet, eps: float, params: ChiParams) -> float:
    """chi_eps at a single point for a single eps (alpha grid of that eps only)."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    solver = ChiSolver(E, D, ChiParams((eps,), params.alpha_per_epsilon, params.surrogate_degree,
                                       params.tolerance, params.t_max))
    return float(solver.chi_eps_values(x)[0])


@dataclass(frozen=True)
class Chi0Result:
    value: float
    by_eps: tuple
    converged: bool

    def __float__(self):
        return self.value


def _chi0_from(values: np.ndarray, tol: float) -> Chi0Result:
    steps = np.diff(values)
    if np.any(steps > 10 * tol):
        raise ChiError(
            f"chi_eps increases by {steps.max():.3g} as eps decreases; discretisation too coarse"
        )
    converged = len(values) < 2 or abs(values[-1] - values[-2]) < tol
    return Chi0Result(float(values[-1]), tuple(float(v) for v in values), bool(converged))


def chi0_at(x, E: SampledSet, D: SampledSet, params: ChiParams, solver: ChiSolver | None = None) -> Chi0Result:
    """chi_0 estimate: chi_eps at the smallest eps of the grid, with the whole
    eps profile and a convergence flag."""
    solver = solver or ChiSolver(E, D, params)
    return _chi0_from(solver.chi_eps_values(x), params.tolerance)


# 8-stop viridis-like ramp, value 0 -> first stop, 1 -> last stop
COLOR_RAMP = ("#440154", "#46327e", "#365c8d", "#277f8e", "#1fa187", "#4ac16d", "#a0da39", "#fde725")


@dataclass(frozen=True, eq=False)
class ChiField:
    grid: SampledSet
    epsilon_grid: tuple
    chi_eps: np.ndarray
    chi0: np.ndarray
    converged: np.ndarray
    surrogate_degree: int

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "y", "z"][: self.grid.dim] + ["chi0"])
        for p, v in zip(self.grid.points, self.chi0):
            w.writerow([repr(float(t)) for t in p] + [repr(float(v))])
        return buf.getvalue()

    def to_svg(self, size: int = 400) -> str:
        if self.grid.dim != 2:
            raise ChiError("SVG heatmaps are 2D only")
        P = self.grid.points
        lo, hi = P.min(axis=0), P.max(axis=0)
        h = self.grid.mesh
        span = float(max(hi - lo)) + h
        s = size / span
        parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}">']
        for p, v in zip(P, self.chi0):
            k = int(round(min(max(v, 0.0), 1.0) * (len(COLOR_RAMP) - 1)))
            x = (p[0] - lo[0]) * s
            y = size - (p[1] - lo[1] + h) * s
            parts.append(
                f'<rect x="{x:.2f}" y="{y:.2f}" width="{h * s:.2f}" height="{h * s:.2f}" fill="{COLOR_RAMP[k]}"/>'
            )
        parts.append("</svg>")
        return "\n".join(parts) + "\n"


def _sweep_order(grid: SampledSet) -> np.ndarray:
    # boustrophedon order keeps consecutive points close, which is what the
    # warm starts between points rely on
    P = grid.points
    if len(P) < 2:
        return np.arange(len(P))
    h = grid.mesh if grid.mesh > 0 else 1.0
    rows = np.round((P[:, 1:] - P[:, 1:].min(axis=0)) / h).astype(int)
    row = rows[:, -1] if P.shape[1] == 2 else rows[:, 1] * (rows[:, 0].max() + 1) + rows[:, 0]
    x = np.where(row % 2 == 0, P[:, 0], -P[:, 0])
    return np.lexsort((x, row))


def chi_field(grid, E: SampledSet, D: SampledSet, params: ChiParams) -> ChiField:
    """chi_eps and chi_0 on a grid (a SampledSet, or ``n`` for an ``n x n``
    lattice over D's bounding box clipped to D's hull)."""
    if isinstance(grid, int):
        grid = grid_in(D, grid)
    solver = ChiSolver(E, D, params)
    vals = np.empty((len(grid), len(params.epsilon_grid)))
    for i in _sweep_order(grid):
        vals[i] = solver.chi_eps_values(grid.points[i])
    res = [_chi0_from(v, params.tolerance) for v in vals]
    return ChiField(
        grid,
        params.epsilon_grid,
        vals,
        np.array([r.value for r in res]),
        np.array([r.converged for r in res]),
        params.surrogate_degree,
    )


def sublevel(field: ChiField, alpha: float) -> SampledSet:
    """Grid points with chi_0 < alpha (possibly empty, with a warning)."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    out = field.grid.subset(field.chi0 < alpha, f"D_alpha({alpha:g})")
    if out.is_empty:
        warnings.warn(f"sublevel set chi_0 < {alpha:g} is empty on this grid", stacklevel=2)
    return out


@dataclass(frozen=True)
class NullEvidence:
    is_null: bool
    min_chi0: float
    witness: tuple
    n_points: int
    annihilating: bool

    def to_dict(self) -> dict:
        return {
            "is_null": self.is_null,
            "min_chi0": self.min_chi0,
            "witness": list(self.witness),
            "n_points": self.n_points,
            "annihilating": self.annihilating,
        }


def is_null_chi(E: SampledSet, D: SampledSet, params: ChiParams, grid=12, field: ChiField | None = None) -> NullEvidence:
    """Evidence that E has zero chi_0-measure in D (chi_0 ~ 1 away from E).

    Grid points within half of E's mesh of a sample of E are left out; if
    nothing is left, the samples of E themselves are the grid.
    """
    if field is None:
        if isinstance(grid, int):
            grid = grid_in(D, grid)
        far = distances(grid.points, E) > 0.5 * E.mesh
        pts = grid.subset(far, "chi grid")
        if pts.is_empty:
            pts = E
        field = chi_field(pts, E, D, params)
        chi0, points = field.chi0, field.grid.points
    else:
        far = distances(field.grid.points, E) > 0.5 * E.mesh
        if np.any(far):
            chi0, points = field.chi0[far], field.grid.points[far]
        else:
            chi0 = np.zeros(len(E))
            points = E.points
    k = int(np.argmin(chi0))
    solver_null = ChiSolver(E, D, params).annihilating
    return NullEvidence(
        bool(chi0[k] > 1 - 2 * params.tolerance),
        float(chi0[k]),
        tuple(float(t) for t in points[k]),
        int(len(chi0)),
        solver_null,
    )


def chi_field_to_json(field: ChiField) -> str:
    return json.dumps(
        {
            "epsilon_grid": list(field.epsilon_grid),
            "surrogate_degree": field.surrogate_degree,
            "points": field.grid.points.tolist(),
            "chi0": field.chi0.tolist(),
            "converged": field.converged.tolist(),
        },
        indent=2,
    )
