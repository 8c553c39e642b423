"""Explicit Runge-Kutta integrators working on batches of states.

``rk4`` is the classical fixed-step scheme.  ``dopri5`` is the Dormand-Prince
5(4) embedded pair with proportional-integral step control and a fourth-order
continuous extension, so output can be sampled on any grid without shortening
steps.  Both accept states of shape ``(..., N)``; a batch shares one step size,
chosen from the worst member.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = ["BlowUpError", "StepSizeError", "SolverStats", "rk4", "dopri5", "DOPRI5"]

BLOWUP = 1e12


class BlowUpError(FloatingPointError):
    """State left the ``|x| <= 1e12`` box or became non-finite."""

    def __init__(self, t: float, norm: float):
        super().__init__(f"solution blew up at t = {t:.6g} (max |x| = {norm:.3g})")
        self.t = t
        self.norm = norm


class StepSizeError(RuntimeError):
    def __init__(self, t: float, h: float):
        super().__init__(f"step size underflow at t = {t:.17g} (h = {h:.3g})")
        self.t = t
        self.h = h


@dataclass
class SolverStats:
    solver: str
    steps: int = 0
    rejected: int = 0
    nfev: int = 0
    extra: dict = field(default_factory=dict)


def _guard(y: np.ndarray, t: float) -> None:
    m = np.max(np.abs(y))
    if not np.isfinite(m) or m > BLOWUP:
        raise BlowUpError(t, float(m))


def rk4(f: Callable, y0, t0: float, t1: float, dt: float, every: int = 1):
    """Classical RK4 from ``t0`` to ``t1``; returns ``(times, states, stats)``.

    The grid is ``t0 + j dt``; a final shorter step lands exactly on ``t1`` when
    the span is not a multiple of ``dt``.  Every ``every``-th step is stored,
    plus the last.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t1 < t0:
        raise ValueError("t1 must not precede t0")
    span = t1 - t0
    n = int(np.ceil(span / dt - 1e-9))
    y = np.array(y0, dtype=float)
    times, states = [t0], [y.copy()]
    stats = SolverStats("rk4")
    for j in range(n):
        t = t0 + j * dt
        h = min(dt, t1 - t)
        k1 = f(t, y)
        k2 = f(t + h / 2, y + (h / 2) * k1)
        k3 = f(t + h / 2, y + (h / 2) * k2)
        k4 = f(t + h, y + h * k3)
        y = y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        stats.steps += 1
        stats.nfev += 4
        tn = t1 if j == n - 1 else t0 + (j + 1) * dt
        _guard(y, tn)
        if (j + 1) % every == 0 or j == n - 1:
            times.append(tn)
            states.append(y.copy())
    return np.array(times), np.array(states), stats


class DOPRI5:
    """Butcher tableau, error weights and dense-output matrix of Dormand-Prince 5(4)."""

    C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
    A = [
        [],
        [1 / 5],
        [3 / 40, 9 / 40],
        [44 / 45, -56 / 15, 32 / 9],
        [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
        [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
        [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
    ]
    B = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
    # fifth-order minus embedded fourth-order weights
    E = np.array([71 / 57600, 0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
    # y(t + th h) = y + h * sum_i k_i * (P[i] @ [th, th^2, th^3, th^4])
    P = np.array([
        [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0, 0, 0, 0],
        [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ])


def _rms(x: np.ndarray) -> float:
    """Worst member's RMS norm over the site axis."""
    return float(np.max(np.sqrt(np.mean(x * x, axis=-1))))


def _initial_step(f, t0, y0, f0, rtol, atol, direction_span):
    sc = atol + rtol * np.abs(y0)
    d0, d1 = _rms(y0 / sc), _rms(f0 / sc)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, direction_span)
    y1 = y0 + h0 * f0
    d2 = _rms((f(t0 + h0, y1) - f0) / sc) / h0
    h1 = max(1e-6, h0 * 1e-3) if max(d1, d2) <= 1e-15 else (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, direction_span)


def dopri5(
    f: Callable,
    y0,
    t0: float,
    t1: float,
    rtol: float = 1e-8,
    atol: float = 1e-10,
    t_eval=None,
    h0: float | None = None,
    max_steps: int = 10_000_000,
):
    """Integrate with Dormand-Prince 5(4) and return ``(times, states, stats)``.

    ``t_eval`` defaults to ``[t0, t1]``; values are produced by the dense
    output of the step that contains them.  The step controller follows the
    PI rule with exponents 0.17 and 0.04 and safety factor 0.9.
    """
    if rtol <= 0 or atol <= 0:
        raise ValueError("tolerances must be positive")
    if t1 <= t0:
        raise ValueError("t1 must exceed t0")
    t_eval = np.array([t0, t1] if t_eval is None else t_eval, dtype=float)
    if t_eval.size and (t_eval[0] < t0 - 1e-12 or t_eval[-1] > t1 + 1e-12 or np.any(np.diff(t_eval) <= 0)):
        raise ValueError("t_eval must be increasing and inside [t0, t1]")

    tab = DOPRI5
    beta, expo1, safe = 0.04, 0.2 - 0.04 * 0.75, 0.9
    facold = 1e-4
    y = np.array(y0, dtype=float)
    out = np.empty((t_eval.size,) + y.shape)
    stats = SolverStats("dopri5")
    t = t0
    k = [None] * 7
    k[0] = f(t, y)
    stats.nfev += 1
    h = h0 if h0 is not None else _initial_step(f, t0, y, k[0], rtol, atol, t1 - t0)
    stats.nfev += 1
    ie = 0
    while ie < t_eval.size and t_eval[ie] <= t0:
        out[ie] = y
        ie += 1
    while t < t1:
        if stats.steps + stats.rejected >= max_steps:
            raise RuntimeError(f"max_steps exceeded at t = {t}")
        h = min(h, t1 - t)
        if h < 16 * np.finfo(float).eps * max(1.0, abs(t)):
            raise StepSizeError(t, h)
        for i in range(1, 7):
            acc = tab.A[i][0] * k[0]
            for j in range(1, i):
                if tab.A[i][j] != 0:
                    acc = acc + tab.A[i][j] * k[j]
            k[i] = f(t + tab.C[i] * h, y + h * acc)
        stats.nfev += 6
        y_new = y + h * acc  # stage 7 argument is the fifth-order solution
        errv = h * sum(tab.E[i] * k[i] for i in (0, 2, 3, 4, 5, 6))
        sc = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = _rms(errv / sc)
        if not np.isfinite(err):
            _guard(y_new, t + h)
            err = 1e10
        fac11 = err**expo1
        if err <= 1.0:
            fac = fac11 / facold**beta
            fac = min(5.0, max(0.1, fac / safe))
            t_new = t + h if t + h < t1 else t1
            while ie < t_eval.size and t_eval[ie] <= t_new:
                th = (t_eval[ie] - t) / h
                q = tab.P @ np.array([th, th**2, th**3, th**4])
                out[ie] = y + h * sum(q[i] * k[i] for i in range(7) if q[i] != 0)
                ie += 1
            facold = max(err, 1e-4)
            _guard(y_new, t_new)
            t, y = t_new, y_new
            k[0] = k[6]
            stats.steps += 1
            h = h / fac
        else:
            stats.rejected += 1
            h = h / min(5.0, fac11 / safe)
    while ie < t_eval.size:
        out[ie] = y
        ie += 1
    stats.extra["h_last"] = h
    return t_eval, out, stats
