"""Stationary solutions of ``C G(x) - B x + F = 0``.

Taking the scalar product with ``C^-1 x`` kills the advection term, which
yields the a-priori bound ``||(C^-1 B)^(1/2) x|| <= ||(C^-1 B)^(-1/2) C^-1 F||``
(for ``C = I`` this is ``||B^(1/2) x|| <= ||B^(-1/2) F||``).  Solutions are
computed by Newton's method along the homotopy ``t F``, starting from ``x = 0``
at ``t = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gmap import G3, GMap, evaluate, linearize_at

__all__ = [
    "StationaryProblem",
    "NewtonFailure",
    "NewtonResult",
    "ContinuationPath",
    "StabilityReport",
    "residual",
    "newton",
    "homotopy_solve",
    "apriori_bound",
    "bound_satisfied",
    "local_stability",
    "small_forcing_threshold",
    "step_forcing",
    "ripple_correlation",
    "has_period3_ripple",
]


def _vec(v, n, name):
    arr = np.broadcast_to(np.asarray(v, dtype=float), (n,)).copy() if np.ndim(v) == 0 else np.asarray(v, dtype=float)
    if arr.shape != (n,):
        raise ValueError(f"{name} must be a scalar or have length {n}")
    return arr


@dataclass(frozen=True, eq=False)
class StationaryProblem:
    """``alpha * G(x) - beta * x + F = 0`` with positive ``beta`` (``alpha`` defaults to 1)."""

    n: int
    advection: GMap = G3
    beta: np.ndarray = 1.0
    F: np.ndarray = 0.0
    alpha: np.ndarray = 1.0

    def __post_init__(self):
        self.advection.check_size(self.n)
        object.__setattr__(self, "beta", _vec(self.beta, self.n, "beta"))
        object.__setattr__(self, "F", _vec(self.F, self.n, "F"))
        object.__setattr__(self, "alpha", _vec(self.alpha, self.n, "alpha"))
        if np.any(self.beta <= 0):
            raise ValueError("beta must be positive")
        if np.any(self.alpha <= 0):
            raise ValueError("alpha must be positive")

    def scaled(self, t: float) -> StationaryProblem:
        return StationaryProblem(self.n, self.advection, self.beta, t * self.F, self.alpha)


def residual(prob: StationaryProblem, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return prob.alpha * evaluate(prob.advection, x) - prob.beta * x + prob.F


def jacobian(prob: StationaryProblem, x) -> np.ndarray:
    return prob.alpha[:, None] * linearize_at(prob.advection, x) - np.diag(prob.beta)


class NewtonFailure(RuntimeError):
    """Newton did not reach the tolerance; carries the last iterate and residual."""

    def __init__(self, reason: str, x: np.ndarray, residual_norm: float, iterations: int):
        super().__init__(f"{reason} after {iterations} iterations (residual {residual_norm:.3e})")
        self.reason = reason
        self.x = x
        self.residual_norm = residual_norm
        self.iterations = iterations


@dataclass(frozen=True)
class NewtonResult:
    x: np.ndarray
    residual_norm: float
    iterations: int
    history: tuple[float, ...]


def newton(prob: StationaryProblem, x_init, tol: float = 1e-12, max_iter: int = 50) -> NewtonResult:
    """Plain Newton iteration on the residual, stopping when ``||r|| <= tol``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    x = np.array(x_init, dtype=float)
    r = residual(prob, x)
    rn = float(np.linalg.norm(r))
    hist = [rn]
    it = 0
    while rn > tol:
        if it >= max_iter:
            raise NewtonFailure("max_iter exceeded", x, rn, it)
        try:
            dx = np.linalg.solve(jacobian(prob, x), -r)
        except np.linalg.LinAlgError:
            raise NewtonFailure("singular Jacobian", x, rn, it) from None
        x = x + dx
        it += 1
        r = residual(prob, x)
        rn = float(np.linalg.norm(r))
        hist.append(rn)
        if not np.isfinite(rn):
            raise NewtonFailure("diverged", x, rn, it)
        # stagnation at roundoff level: accept a tiny plateau only if below tol
        if it >= 3 and rn >= hist[-2] and rn >= hist[-3] and rn > tol:
            raise NewtonFailure("stagnated", x, rn, it)
    return NewtonResult(x, rn, it, tuple(hist))


def apriori_bound(prob: StationaryProblem) -> float:
    """``||(C^-1 B)^(-1/2) C^-1 F||``: bound on ``||(C^-1 B)^(1/2) x||`` for every root."""
    w = prob.beta / prob.alpha
    return float(np.linalg.norm(prob.F / prob.alpha / np.sqrt(w)))


def bound_satisfied(prob: StationaryProblem, x, rtol: float = 1e-10) -> bool:
    w = prob.beta / prob.alpha
    lhs = float(np.linalg.norm(np.sqrt(w) * np.asarray(x)))
    rhs = apriori_bound(prob)
    return lhs <= rhs * (1 + rtol) + 1e-14


@dataclass
class ContinuationPath:
    """Accepted homotopy steps ``t_i`` with solutions, residual norms and Newton counts."""

    t: list[float] = field(default_factory=list)
    x: list[np.ndarray] = field(default_factory=list)
    residuals: list[float] = field(default_factory=list)
    iterations: list[int] = field(default_factory=list)
    bound_ok: list[bool] = field(default_factory=list)
    failed_at: float | None = None
    message: str = ""

    @property
    def complete(self) -> bool:
        return self.failed_at is None and bool(self.t) and self.t[-1] == 1.0

    @property
    def solution(self) -> np.ndarray:
        return self.x[-1]

    def to_json(self) -> dict:
        return {
            "t": self.t, "residuals": self.residuals, "iterations": self.iterations,
            "bound_ok": self.bound_ok, "complete": self.complete, "failed_at": self.failed_at,
            "message": self.message,
        }


def homotopy_solve(
    prob: StationaryProblem,
    steps: int,
    newton_tol: float = 1e-12,
    max_iter: int = 50,
    min_step: float = 1e-6,
) -> ContinuationPath:
    """Continue the root from ``x = 0`` at ``t = 0`` to ``t = 1`` on a uniform grid.

    A failed Newton solve halves the local step (down to ``min_step``); the
    uniform grid is resumed afterwards.  Every accepted solution is checked
    against the a-priori bound of the scaled problem.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    path = ContinuationPath()
    x = np.zeros(prob.n)
    path.t.append(0.0)
    path.x.append(x.copy())
    path.residuals.append(float(np.linalg.norm(residual(prob.scaled(0.0), x))))
    path.iterations.append(0)
    path.bound_ok.append(True)
    delta = 1.0 / steps
    t = 0.0
    k = 0
    while t < 1.0:
        target = min(1.0, (k + 1) * delta)
        h = target - t
        while True:
            t_try = t + h if t + h < 1.0 - 1e-15 else 1.0
            sub = prob.scaled(t_try)
            try:
                res = newton(sub, x, newton_tol, max_iter)
                break
            except NewtonFailure as exc:
                h /= 2
                if h < min_step:
                    path.failed_at = t_try
                    path.message = f"step floor reached near t = {t_try:.6g}: {exc}"
                    return path
        t, x = t_try, res.x
        if t >= target - 1e-15:
            k += 1
            t = target
        path.t.append(t)
        path.x.append(x.copy())
        path.residuals.append(res.residual_norm)
        path.iterations.append(res.iterations)
        path.bound_ok.append(bound_satisfied(sub, x))
    return path


@dataclass(frozen=True)
class StabilityReport:
    abscissa: float
    stable: bool
    indeterminate: bool


def local_stability(prob: StationaryProblem, x_star, tol: float = 1e-8) -> StabilityReport:
    """Spectral abscissa of ``diag(alpha) A[x*] - B``; within ``tol`` of zero is indeterminate."""
    ev = np.linalg.eigvals(jacobian(prob, np.asarray(x_star, dtype=float)))
    a = float(ev.real.max())
    return StabilityReport(a, a < -tol, abs(a) <= tol)


def small_forcing_threshold(prob: StationaryProblem) -> float:
    """Forcing norm below which every trajectory converges to the unique root.

    The symmetric part of ``A[x]`` is bounded by ``L ||x||`` with
    ``L = 2 sum |c|``, so ``C^-1 B - A[x]`` stays positive definite for
    ``||x|| < delta = min(beta / alpha) / L``.  Roots obey
    ``||x|| <= c3 ||F||`` with ``c3`` from the a-priori bound, giving the
    threshold ``delta / c3``.
    """
    L = 2.0 * sum(abs(float(t.coeff)) for t in prob.advection.terms)
    w = prob.beta / prob.alpha
    delta = float(w.min()) / L
    # ||x|| <= ||w^(1/2) x|| / sqrt(min w) <= ||F / alpha|| / min w
    c3 = 1.0 / (float(w.min()) * float(prob.alpha.min()))
    return delta / c3


def step_forcing(n: int, high: float, low: float = 1.0) -> np.ndarray:
    """``F_i = low`` on the first half of the ring and ``high`` on the second."""
    f = np.full(n, float(low))
    f[n // 2:] = float(high)
    return f


def ripple_correlation(x, lag: int) -> float:
    """Cyclic autocorrelation at ``lag`` of ``x`` minus its 3-site moving average.

    Returns 0 for a profile that equals its moving average (e.g. constant).
    """
    x = np.asarray(x, dtype=float)
    d = x - (np.roll(x, 1) + x + np.roll(x, -1)) / 3
    dd = float(np.dot(d, d))
    if dd <= 1e-30 * max(1.0, float(np.dot(x, x))):
        return 0.0
    return float(np.dot(d, np.roll(d, lag))) / dd


def has_period3_ripple(x, threshold: float = 0.5) -> bool:
    """Small-scale oscillation of period 3 superposed on the smooth profile."""
    return ripple_correlation(x, 3) > threshold and ripple_correlation(x, 1) < 0
