"""Dense linear programming: ``maximize c.x  subject to  A x <= b``, x free.

The solver runs a two-phase revised primal simplex on the dual problem

    minimize b.y   subject to   A^T y = c,  y >= 0,

whose basis is only ``n_vars x n_vars``.  That suits every problem in this
package: few unknowns (polynomial coefficients), many rows (samples).  The
simplex multipliers of the dual are the primal point, and the dual basic
values are the optimality certificate.

Pricing is Dantzig's rule.  A run of degenerate pivots in phase 2 triggers
a small random perturbation of the right-hand side; once optimal, the true
right-hand side is restored and any infeasibility is repaired with dual
simplex pivots.  Phase 1, or a second stall, falls back to Bland's rule.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)

PIVOT_TOL = 1e-10
FEAS_TOL = 1e-8
OPT_TOL = 1e-10
DEGENERATE_STREAK = 20
REFACTOR_EVERY = 64
PERTURB = 1e-7
HARRIS_TOL = 1e-9
REPAIR_STREAK = 200

OPTIMAL, INFEASIBLE, UNBOUNDED = "optimal", "infeasible", "unbounded"


class LpError(RuntimeError):
    pass


class IterationLimitError(LpError):
    pass


@dataclass(frozen=True, eq=False)
class LpProblem:
    objective: np.ndarray
    constraint_matrix: np.ndarray
    bounds: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float).ravel()
        A = np.asarray(self.constraint_matrix, dtype=float)
        b = np.asarray(self.bounds, dtype=float).ravel()
        if A.ndim != 2 or A.shape[1] != len(c) or A.shape[0] != len(b):
            raise ValueError(f"inconsistent shapes: A {A.shape}, c {c.shape}, b {b.shape}")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
            raise ValueError("LP data must be finite")
        for name, v in (("objective", c), ("constraint_matrix", A), ("bounds", b)):
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @property
    def n_vars(self) -> int:
        return len(self.objective)


@dataclass(eq=False)
class LpSolution:
    status: str
    x: np.ndarray
    objective_value: float
    dual: np.ndarray | None = None
    basis: tuple | None = None
    ray: np.ndarray | None = None
    iterations: int = 0
    max_violation: float = 0.0
    duality_gap: float = float("nan")
    info: dict = field(default_factory=dict)

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


class _Restart(Exception):
    """The repair after a perturbation stalled."""


class _DualSimplex:
    """State of the revised simplex on ``min b.y, A^T y = c, y >= 0``."""

    def __init__(self, A, b, c, max_iter, verbose, perturb=True):
        self.A, self.b, self.c = A, b, c
        self.perturb = perturb
        self.m, self.n = A.shape
        self.max_iter = max_iter
        self.verbose = verbose
        self.iterations = 0
        self.sign = np.where(c < 0, -1.0, 1.0)
        self.rhs = c
        self.rng = np.random.default_rng(0)
        self.costs = {
            1: np.concatenate([np.zeros(self.m), np.ones(self.n)]),
            2: np.concatenate([b, np.zeros(self.n)]),
        }

    # columns >= m are artificials: column m + j is sign_j * e_j
    def column(self, k):
        if k < self.m:
            return self.A[k]
        e = np.zeros(self.n)
        e[k - self.m] = self.sign[k - self.m]
        return e

    def cost(self, k, phase):
        return self.costs[phase][k]

    def refactor(self):
        B = np.column_stack([self.column(k) for k in self.basic])
        try:
            self.Binv = np.linalg.inv(B)
        except np.linalg.LinAlgError:
            raise LpError(f"singular basis after {self.iterations} pivots") from None
        self.xB = self.Binv @ self.rhs
        self.since_refactor = 0

    def start_artificial(self):
        self.basic = [self.m + j for j in range(self.n)]
        self.Binv = np.diag(self.sign)
        self.xB = np.abs(self.c).astype(float)
        self.since_refactor = 0

    def crash(self):
        """Pivot out artificials sitting at zero (zero entries of ``c``).

        The pivots are degenerate, so feasibility is kept whatever the sign
        of the pivot element; taking the largest element of the row keeps
        the basis well conditioned.  Objectives with few nonzero entries
        (the minimax LP has one) would otherwise spend phase 1 on long
        degenerate runs.
        """
        in_basis = self._in_basis()
        for i, k in enumerate(list(self.basic)):
            if k < self.m or self.xB[i] != 0.0:
                continue
            row = self.Binv[i] @ self.A.T
            row[in_basis] = 0.0
            j = int(np.argmax(np.abs(row)))
            if abs(row[j]) > 1e-9:
                self.pivot(i, j, self.Binv @ self.A[j], 0.0, snap=False)
                in_basis[j] = True

    def start_warm(self, basis) -> bool:
        """Start from ``basis``.  A basis that is infeasible for this
        right-hand side but has nonnegative reduced costs (an optimal basis
        for another objective) is repaired with dual simplex pivots."""
        basis = [int(k) for k in basis]
        if len(basis) != self.n or len(set(basis)) != self.n or not all(0 <= k < self.m for k in basis):
            return False
        B = self.A[basis].T
        if np.linalg.cond(B) > 1e12:
            return False
        self.basic = basis
        self.refactor()
        if np.all(self.xB >= -FEAS_TOL * (1 + np.abs(self.xB).max())):
            np.maximum(self.xB, 0.0, out=self.xB)
            return True
        r = self.b - self.A @ self.multipliers(2)
        short = np.minimum(r + OPT_TOL * (1.0 + np.abs(self.b)), 0.0)
        true_b = self.b
        if np.any(short < 0):
            # cost shifting: raise the costs of the dual infeasible (nonbasic)
            # columns for the repair, then restore them; the repaired basis
            # stays primal feasible and phase 2 takes it from there
            self._set_costs(self.b - short)
        ok = self._repair(budget=4 * (self.m + self.n))
        self._set_costs(true_b)
        return ok

    def _set_costs(self, b):
        self.b = b
        self.costs[2] = np.concatenate([b, np.zeros(self.n)])

    def multipliers(self, phase):
        cB = self.costs[phase][self.basic]
        return self.Binv.T @ cB

    def run(self, phase) -> str:
        """Iterate to optimality; returns "optimal" or "unbounded"."""
        bland = False
        perturbed = False
        streak = 0
        tol = OPT_TOL * (1.0 + np.abs(self.b)) if phase == 2 else np.full(self.m, OPT_TOL)
        in_basis = self._in_basis()
        while True:
            self._check_limit(phase)
            pi = self.multipliers(phase)
            r = (self.b if phase == 2 else 0.0) - self.A @ pi
            r[in_basis] = 0.0
            cand = np.flatnonzero(r < -tol)
            if len(cand) == 0:
                self.pi = pi
                if perturbed and not self._unperturb():
                    raise _Restart
                return OPTIMAL
            enter = int(cand[0]) if bland else int(cand[np.argmin(r[cand])])
            d = self.Binv @ self.A[enter]
            pos = np.flatnonzero(d > PIVOT_TOL * max(1.0, np.abs(d).max()))
            if len(pos) == 0:
                self.pi = pi
                self.enter = enter
                return UNBOUNDED
            ratios = np.maximum(self.xB[pos], 0.0) / d[pos]
            theta = ratios.min()
            ties = pos[ratios <= theta + 1e-12 * (1.0 + theta)]
            if bland:
                leave = int(min(ties, key=lambda i: self.basic[i]))
            else:
                leave = int(ties[np.argmax(d[ties])])
            theta = max(self.xB[leave], 0.0) / d[leave]
            if self.verbose:
                log.debug(
                    "phase %d it %d: enter row %d (r=%.3e) leave basic %d theta=%.3e %s",
                    phase, self.iterations, enter, r[enter], self.basic[leave], theta,
                    "bland" if bland else "dantzig",
                )
            gain = theta * -r[enter]
            self.pivot(leave, enter, d, theta)
            in_basis[enter] = True
            old = self.basic_out
            if old < self.m:
                in_basis[old] = False
            obj = abs(float(self.xB @ self.costs[phase][self.basic]))
            if gain > 1e-12 * (1.0 + obj):
                streak = 0
                bland = False
                continue
            streak += 1
            if streak < DEGENERATE_STREAK:
                continue
            if phase == 2 and self.perturb and not perturbed:
                self._perturb()
                perturbed = True
                streak = 0
            else:
                bland = True

    def _in_basis(self):
        mask = np.zeros(self.m, dtype=bool)
        for k in self.basic:
            if k < self.m:
                mask[k] = True
        return mask

    def _check_limit(self, phase):
        if self.iterations >= self.max_iter:
            raise IterationLimitError(
                f"simplex exceeded {self.max_iter} iterations (phase {phase}, "
                f"{self.m} rows x {self.n} vars)"
            )

    def _perturb(self):
        # shift the right-hand side so no basic value sits at zero; the
        # reduced costs do not depend on it, so optimality carries over
        scale = 1.0 + np.abs(self.xB).max()
        real = np.array([k < self.m for k in self.basic])
        bump = self.rng.uniform(0.5, 1.0, self.n) * PERTURB * scale
        self.xB = self.xB + np.where(real, bump, 0.0)
        self.rhs = np.column_stack([self.column(k) for k in self.basic]) @ self.xB
        if self.verbose:
            log.debug("perturbed right-hand side at iteration %d", self.iterations)

    def _unperturb(self) -> bool:
        """Restore the true right-hand side and repair feasibility; False
        when the repair did not finish within its budget."""
        self.rhs = self.c
        self.refactor()
        if not self._repair(budget=20 * self.n + 200):
            return False
        self.pi = self.multipliers(2)
        return True

    def _repair(self, budget=None) -> bool:
        """Dual simplex pivots from a basis with nonnegative reduced costs
        until the basic values are nonnegative.  False means no
        nonnegative solution of ``A^T y = c`` exists, or ``budget`` pivots
        did not suffice."""
        in_basis = self._in_basis()
        scale = 1.0 + np.abs(self.xB).max()
        start = self.iterations
        streak = 0
        while True:
            self._check_limit(2)
            if budget is not None and self.iterations - start >= budget:
                return False
            i = int(np.argmin(self.xB))
            if self.xB[i] >= -FEAS_TOL * scale:
                np.maximum(self.xB, 0.0, out=self.xB)
                return True
            bland = streak >= REPAIR_STREAK
            if bland:
                # dual Bland: lowest-index infeasible row, lowest-index tie
                rows = np.flatnonzero(self.xB < -FEAS_TOL * scale)
                i = int(min(rows, key=lambda t: self.basic[t]))
            pi = self.multipliers(2)
            r = np.maximum(self.b - self.A @ pi, 0.0)
            alpha = self.A @ self.Binv[i]
            alpha[in_basis] = 0.0
            neg = np.flatnonzero(alpha < -PIVOT_TOL * max(1.0, np.abs(alpha).max()))
            if len(neg) == 0:
                return False
            ratios = r[neg] / -alpha[neg]
            if bland:
                ties = neg[ratios <= ratios.min() + 1e-12]
                enter = int(ties[0])
            else:
                # Harris: the largest pivot among near-minimal ratios
                bound = ((r[neg] + HARRIS_TOL) / -alpha[neg]).min()
                ties = neg[ratios <= bound]
                enter = int(ties[np.argmax(-alpha[ties])])
            # dual progress is the step times the infeasibility
            streak = 0 if ratios.min() * -self.xB[i] > 1e-12 * scale else streak + 1
            d = self.Binv @ self.A[enter]
            self.pivot(i, enter, d, self.xB[i] / d[i], snap=False)
            in_basis[enter] = True
            if self.basic_out < self.m:
                in_basis[self.basic_out] = False

    def pivot(self, leave, enter, d, theta, snap=True):
        self.iterations += 1
        self.xB -= theta * d
        self.xB[leave] = theta
        if snap:
            self._snap()
        self.basic_out = self.basic[leave]
        self.basic[leave] = enter
        row = self.Binv[leave] / d[leave]
        self.Binv -= np.outer(d, row)
        self.Binv[leave] = row
        self.since_refactor += 1
        if self.since_refactor >= REFACTOR_EVERY:
            self.refactor()
            if snap:
                self._snap()

    def _snap(self):
        # round-off sized basic values are degenerate zeros
        small = self.xB < 1e-13 * (1.0 + np.abs(self.xB).max())
        self.xB[small] = 0.0

    def drive_out_artificials(self):
        for i, k in enumerate(list(self.basic)):
            if k < self.m:
                continue
            row = self.Binv[i] @ self.A.T
            row[[j for j in self.basic if j < self.m]] = 0.0
            j = int(np.argmax(np.abs(row)))
            if abs(row[j]) > 1e-9:
                d = self.Binv @ self.A[j]
                self.pivot(i, j, d, max(self.xB[i], 0.0) / d[i])


def _scale(A, b, c):
    row = np.abs(A).max(axis=1)
    zero_rows = row == 0
    row[zero_rows] = 1.0
    As = A / row[:, None]
    col = np.abs(As).max(axis=0)
    col[col == 0] = 1.0
    colscale = 1.0 / col
    return As * colscale, b / row, c * colscale, row, colscale, zero_rows


def solve(
    p: LpProblem,
    *,
    basis=None,
    max_iter: int | None = None,
    verbose: bool = False,
) -> LpSolution:
    """Maximise ``c.x`` over ``A x <= b`` with free ``x``.

    ``basis`` optionally warm-starts from the ``basis`` of a previous
    solution with the same matrix.  If only ``b`` changed the start is
    primal; if only ``c`` changed it is repaired by dual simplex pivots;
    anything else falls back to a cold start.  A list of bases is tried
    in order.
    Returns an :class:`LpSolution`; infeasible and unbounded problems are
    reported through ``status`` (unbounded ones carry a ``ray`` with
    ``A ray <= 0`` and ``c.ray > 0``).  Exceeding ``max_iter`` raises
    :class:`IterationLimitError`.
    """
    A, b, c = p.constraint_matrix, p.bounds, p.objective
    m, n = A.shape
    As, bs, cs, rowscale, colscale, zero_rows = _scale(A, b, c)
    if np.any(bs[zero_rows] < -FEAS_TOL):
        return LpSolution(INFEASIBLE, np.full(n, np.nan), float("nan"))
    if max_iter is None:
        max_iter = 50 * (m + n) + 1000

    if n == 0:
        feasible = np.all(b >= -FEAS_TOL * (1 + np.abs(b)))
        return LpSolution(OPTIMAL if feasible else INFEASIBLE, np.zeros(0), 0.0, np.zeros(m), ())

    if basis is None:
        candidates = []
    elif any(q is None or np.ndim(q) == 1 for q in basis):
        candidates = [q for q in basis if q is not None]
    else:
        candidates = [basis]
    spent = 0
    # a stalled repair after perturbing restarts cold on Bland's rule alone
    for perturb in (True, False):
        S = _DualSimplex(As, bs, cs, max_iter, verbose, perturb)
        S.iterations = spent
        try:
            early = _start(S, candidates if perturb else [], As, bs, cs, colscale, max_iter)
            if early is not None:
                return early
            unbounded = S.run(2) == UNBOUNDED
            break
        except _Restart:
            spent = S.iterations
            log.debug("repair stalled after %d iterations; restarting without perturbation", spent)
    if unbounded:
        return LpSolution(INFEASIBLE, np.full(n, np.nan), float("nan"), iterations=S.iterations)

    S.refactor()
    np.maximum(S.xB, 0.0, out=S.xB)
    pi = S.multipliers(2)
    x = colscale * pi
    y = np.zeros(m)
    for i, k in enumerate(S.basic):
        if k < m:
            y[k] = S.xB[i]
    y /= rowscale
    obj = float(c @ x)
    viol = float(np.max((A @ x - b) / (1.0 + np.abs(b)), initial=0.0))
    gap = abs(float(b @ y) - obj) / (1.0 + abs(obj))
    if verbose:
        log.debug("optimal after %d iterations: obj=%.12g gap=%.2e viol=%.2e", S.iterations, obj, gap, viol)
    return LpSolution(
        OPTIMAL,
        x,
        obj,
        dual=y,
        basis=tuple(int(k) for k in S.basic if k < m) if all(k < m for k in S.basic) else None,
        iterations=S.iterations,
        max_violation=viol,
        duality_gap=gap,
    )


def _start(S, candidates, As, bs, cs, colscale, max_iter) -> LpSolution | None:
    """Warm start from the first usable candidate, else phase 1.  Returns a
    solution only when phase 1 already decides the problem."""
    if any(S.start_warm(q) for q in candidates):
        return None
    S.start_artificial()
    S.crash()
    if not np.all(cs == 0):
        S.run(1)
        infeas = sum(S.xB[i] for i, k in enumerate(S.basic) if k >= S.m)
        if infeas > 1e-9 * (1.0 + np.abs(cs).max()):
            ray = colscale * S.pi
            ray /= np.abs(ray).max()
            status = UNBOUNDED if _primal_feasible(As, bs, max_iter) else INFEASIBLE
            return LpSolution(status, np.full(len(colscale), np.nan), float("inf") if status == UNBOUNDED else float("nan"),
                              ray=ray if status == UNBOUNDED else None, iterations=S.iterations)
    S.drive_out_artificials()
    return None


def _primal_feasible(As, bs, max_iter) -> bool:
    """Does ``As x <= bs`` have a solution?  Decided through the dual of
    ``max 0`` which is unbounded exactly when the primal is infeasible."""
    if np.all(bs >= 0):
        return True
    m, n = As.shape
    S = _DualSimplex(As, bs, np.zeros(n), max_iter, False)
    S.start_artificial()
    S.drive_out_artificials()
    # artificials still basic span directions As does not constrain; they
    # sit at zero and never re-enter, which is all phase 2 needs.
    return S.run(2) == OPTIMAL


def maximize(c, A, b, **kw) -> LpSolution:
    """Shorthand for ``solve(LpProblem(c, A, b))``."""
    return solve(LpProblem(c, A, b), **kw)
