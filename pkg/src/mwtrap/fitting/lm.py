"""A small Levenberg-Marquardt solver with Marquardt diagonal scaling.

Written out rather than delegated so the iteration trace, damping schedule and
stopping rule are fixed and visible to callers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import FitError

MAX_ITER = 500
XTOL = 1e-10


@dataclass
class LMResult:
    x: np.ndarray
    residual: np.ndarray
    jacobian: np.ndarray
    iterations: int
    history: list = field(default_factory=list)

    @property
    def cost(self) -> float:
        return float(self.residual @ self.residual)

    def covariance(self) -> np.ndarray:
        """``s^2 (J^T J)^-1`` with ``s^2`` the residual variance per degree of freedom."""
        m, n = self.jacobian.shape
        dof = max(m - n, 1)
        s2 = self.cost / dof
        jtj = self.jacobian.T @ self.jacobian
        return s2 * np.linalg.pinv(jtj)


def numeric_jacobian(fun: Callable, x: np.ndarray, r0: np.ndarray | None = None,
                     rel_step: float = 1e-7) -> np.ndarray:
    """Central-difference Jacobian; step ``rel_step * max(|x_i|, 1)``."""
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(x.size):
        h = rel_step * max(abs(x[i]), 1.0)
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        cols.append((fun(xp) - fun(xm)) / (2 * h))
    return np.column_stack(cols)


def levenberg_marquardt(fun: Callable[[np.ndarray], np.ndarray], x0, jac: Callable | None = None,
                        max_iter: int = MAX_ITER, xtol: float = XTOL,
                        lam0: float = 1e-3) -> LMResult:
    """Minimise ``sum(fun(x)**2)``.

    Stops when every component of the accepted step is below
    ``xtol * (|x_i| + xtol)``, when the residual vanishes, or when no damping
    level up to 1e16 reduces the cost (a stationary point). Raises
    :class:`FitError` after ``max_iter`` iterations.
    """
    x = np.array(x0, dtype=float)
    jacobian = jac or (lambda p: numeric_jacobian(fun, p))
    r = np.asarray(fun(x), dtype=float)
    cost = r @ r
    lam = lam0
    history = [x.copy()]
    for it in range(1, max_iter + 1):
        J = jacobian(x)
        A = J.T @ J
        g = J.T @ r
        diag = np.diag(A).copy()
        diag[diag <= 0] = max(diag.max(), 1.0) * 1e-12
        if cost == 0.0 or not np.any(g):
            return LMResult(x, r, J, it, history)
        while True:
            try:
                step = np.linalg.solve(A + lam * np.diag(diag), -g)
            except np.linalg.LinAlgError:
                step = np.linalg.lstsq(A + lam * np.diag(diag), -g, rcond=None)[0]
            x_new = x + step
            r_new = np.asarray(fun(x_new), dtype=float)
            cost_new = r_new @ r_new
            if np.isfinite(cost_new) and cost_new <= cost:
                break
            lam *= 10
            if lam > 1e16:
                return LMResult(x, r, J, it, history)
        small = np.all(np.abs(step) <= xtol * (np.abs(x) + xtol))
        x, r, cost = x_new, r_new, cost_new
        history.append(x.copy())
        lam = max(lam / 10, 1e-15)
        if small:
            return LMResult(x, r, jacobian(x), it, history)
    raise FitError(f"Levenberg-Marquardt did not converge in {max_iter} iterations",
                   last_iterate=x, history=history)
