"""Time integration of homogeneous and site-inhomogeneous ring systems.

The general system is ``dx/dt = alpha * G(x) - beta * x + gamma(t)`` with
per-site vectors ``alpha``, ``beta`` and forcing ``gamma`` (constant or a
callable of ``t``).  The standard form has ``alpha = beta = 1`` and
``gamma = F``; the inviscid form drops dissipation and forcing.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import integrate as _int
from .gmap import G3, GMap, evaluate
from .integrate import BlowUpError, StepSizeError

__all__ = [
    "SystemSpec",
    "Trajectory",
    "BlowUpError",
    "StepSizeError",
    "rhs",
    "make_rhs",
    "integrate_rk4",
    "integrate_adaptive",
    "random_initial",
    "effective_forcing",
    "rescale",
    "large_forcing_spec",
    "Invariant",
    "InvariantSet",
    "AuditReport",
    "audit",
    "energy",
    "sine_initial",
    "energy_loss_rate",
    "N4Reduction",
    "N6Reduction",
    "reduce_n4",
    "reduce_n6",
]


def _site_vector(v, n: int, name: str) -> np.ndarray:
    arr = np.broadcast_to(np.asarray(v, dtype=float), (n,)).copy() if np.ndim(v) == 0 else np.asarray(v, dtype=float)
    if arr.shape != (n,):
        raise ValueError(f"{name} must be a scalar or have length {n}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SystemSpec:
    """Ring system ``alpha * G(x) - beta * x + gamma``.

    ``gamma`` may be a callable ``t -> array`` for time-dependent forcing.
    Setting ``inviscid=True`` requires zero dissipation and forcing.
    ``allow_aliasing`` admits ``n < 2k + 2`` (offsets wrap onto each other).
    """

    n: int
    advection: GMap = G3
    alpha: np.ndarray = 1.0
    beta: np.ndarray = 1.0
    gamma: np.ndarray | Callable[[float], np.ndarray] = 0.0
    inviscid: bool = False
    allow_aliasing: bool = False

    def __post_init__(self):
        self.advection.check_size(self.n, self.allow_aliasing)
        object.__setattr__(self, "alpha", _site_vector(self.alpha, self.n, "alpha"))
        object.__setattr__(self, "beta", _site_vector(self.beta, self.n, "beta"))
        if not callable(self.gamma):
            object.__setattr__(self, "gamma", _site_vector(self.gamma, self.n, "gamma"))
        if self.inviscid:
            if np.any(self.beta != 0) or callable(self.gamma) or np.any(self.gamma != 0):
                raise ValueError("inviscid systems need beta = 0 and gamma = 0")
        elif np.any(self.beta <= 0):
            raise ValueError("dissipation beta must be positive")

    @classmethod
    def standard(cls, n: int, F: float, advection: GMap = G3) -> SystemSpec:
        """``G(x) - x + F e``."""
        return cls(n, advection, 1.0, 1.0, float(F))

    @classmethod
    def inviscid_system(cls, n: int, advection: GMap = G3, allow_aliasing: bool = False) -> SystemSpec:
        return cls(n, advection, 1.0, 0.0, 0.0, inviscid=True, allow_aliasing=allow_aliasing)

    @property
    def is_standard(self) -> bool:
        """True when ``alpha = beta = 1`` and the forcing is one constant ``F``."""
        return (
            not callable(self.gamma)
            and np.all(self.alpha == 1)
            and np.all(self.beta == 1)
            and np.all(self.gamma == self.gamma[0])
        )

    @property
    def forcing(self) -> float:
        """Scalar ``F`` of a standard-form system."""
        if not self.is_standard:
            raise ValueError("forcing is defined for standard-form systems only")
        return float(self.gamma[0])

    def with_forcing(self, F: float) -> SystemSpec:
        return replace(self, gamma=float(F))

    def gamma_at(self, t: float) -> np.ndarray:
        if callable(self.gamma):
            return _site_vector(self.gamma(t), self.n, "gamma(t)")
        return self.gamma


@dataclass
class Trajectory:
    """Sampled solution: ``states[j]`` is the state at ``times[j]``."""

    times: np.ndarray
    states: np.ndarray
    solver_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=float)
        if self.times.ndim != 1 or self.states.shape[0] != self.times.size:
            raise ValueError("times and states disagree in length")
        if self.times.size > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    @property
    def n(self) -> int:
        return self.states.shape[-1]

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def window(self, t0: float, t1: float) -> Trajectory:
        m = (self.times >= t0 - 1e-9) & (self.times <= t1 + 1e-9)
        if not m.any():
            raise ValueError(f"no samples in [{t0}, {t1}]")
        return Trajectory(self.times[m], self.states[m], dict(self.solver_meta))


def make_rhs(spec: SystemSpec) -> Callable[[float, np.ndarray], np.ndarray]:
    """Vector field ``f(t, x)``; works on stacks of states along leading axes."""
    a, b = spec.alpha, spec.beta
    uniform_a = bool(np.all(a == 1))

    def g_eval(x):
        return evaluate(spec.advection, x, spec.allow_aliasing)

    if spec.inviscid:
        if uniform_a:
            return lambda t, x: g_eval(x)
        return lambda t, x: a * g_eval(x)
    if callable(spec.gamma):
        return lambda t, x: a * g_eval(x) - b * x + spec.gamma_at(t)
    c = spec.gamma
    if uniform_a and np.all(b == 1):
        return lambda t, x: g_eval(x) - x + c
    return lambda t, x: a * g_eval(x) - b * x + c


def rhs(spec: SystemSpec, t: float, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != spec.n:
        raise ValueError(f"state length {x.shape[-1]} does not match N = {spec.n}")
    if not np.all(np.isfinite(x)):
        raise ValueError("state is not finite")
    return make_rhs(spec)(t, x)


def _check_x0(spec: SystemSpec, x0) -> np.ndarray:
    x0 = np.array(x0, dtype=float)
    if x0.shape[-1] != spec.n:
        raise ValueError(f"initial state length {x0.shape[-1]} does not match N = {spec.n}")
    if not np.all(np.isfinite(x0)):
        raise ValueError("initial state is not finite")
    return x0


def integrate_rk4(spec: SystemSpec, x0, t0: float, t1: float, dt: float, every: int = 1) -> Trajectory:
    """Fixed-step classical RK4, sampled every ``every`` steps."""
    x0 = _check_x0(spec, x0)
    t, y, st = _int.rk4(make_rhs(spec), x0, t0, t1, dt, every)
    return Trajectory(t, y, {"solver": st.solver, "steps": st.steps, "rejected": 0, "nfev": st.nfev, "dt": dt})


def integrate_adaptive(
    spec: SystemSpec,
    x0,
    t0: float,
    t1: float,
    rtol: float = 1e-8,
    atol: float = 1e-10,
    dt_out: float | None = None,
) -> Trajectory:
    """Dormand-Prince 5(4) with PI step control; dense output every ``dt_out``.

    Without ``dt_out`` only the end points are returned.
    """
    x0 = _check_x0(spec, x0)
    if dt_out is None:
        grid = np.array([t0, t1])
    else:
        if dt_out <= 0:
            raise ValueError("dt_out must be positive")
        m = int(np.floor((t1 - t0) / dt_out + 1e-9))
        grid = t0 + dt_out * np.arange(m + 1)
        if t1 - grid[-1] > 1e-9 * max(1.0, abs(t1)):
            grid = np.append(grid, t1)
        grid[-1] = min(grid[-1], t1)
    t, y, st = _int.dopri5(make_rhs(spec), x0, t0, t1, rtol, atol, grid)
    meta = {"solver": st.solver, "steps": st.steps, "rejected": st.rejected, "nfev": st.nfev,
            "rtol": rtol, "atol": atol}
    return Trajectory(t, y, meta)


def random_initial(spec: SystemSpec, rng: np.random.Generator, sigma: float | None = None) -> np.ndarray:
    """``F e`` plus i.i.d. normal noise with ``sigma = 0.01 max(1, |F|)``.

    For non-standard systems the base state is the forcing vector.
    """
    base = spec.gamma_at(0.0)
    F = float(np.max(np.abs(base))) if base.size else 0.0
    if sigma is None:
        sigma = 0.01 * max(1.0, F)
    return base + sigma * rng.standard_normal(spec.n)


def energy(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.sum(x * x, axis=-1)


def sine_initial(n: int, E0: float) -> np.ndarray:
    """``c (1 + sin(2 pi j / n))`` scaled to energy ``E0``."""
    base = 1.0 + np.sin(2 * np.pi * np.arange(n) / n)
    return base * np.sqrt(E0 / np.sum(base * base))


def energy_loss_rate(traj: Trajectory) -> float:
    """Average relative energy loss in percent per unit time over the trajectory."""
    E = energy(traj.states)
    span = traj.times[-1] - traj.times[0]
    if span <= 0:
        raise ValueError("trajectory spans no time")
    return float(100.0 * (E[0] - E[-1]) / E[0] / span)


def effective_forcing(alpha: float, beta: float, gamma: float) -> float:
    """``F = alpha gamma / beta^2`` of the standard form."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    return alpha * gamma / beta**2


def rescale(traj: Trajectory, alpha: float, beta: float, gamma: float | None = None) -> Trajectory:
    """Map a standard-form solution ``x(t)`` to ``X(T) = (beta/alpha) x(beta T)``.

    ``X`` solves ``dX/dT = alpha G(X) - beta X + gamma`` when ``x`` solves the
    standard form with ``F = alpha gamma / beta^2``.  ``gamma`` is only used
    to record the effective forcing.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    if alpha == 0:
        raise ValueError("alpha must be nonzero")
    meta = dict(traj.solver_meta)
    meta["rescaled"] = {"alpha": alpha, "beta": beta, "gamma": gamma}
    if gamma is not None:
        meta["rescaled"]["F"] = effective_forcing(alpha, beta, gamma)
    return Trajectory(traj.times / beta, (beta / alpha) * traj.states, meta)


def large_forcing_spec(n: int, F: float, exponent: float = 2 / 3, advection: GMap = G3) -> SystemSpec:
    """Slow-variable form ``y' = G(y) - F^-g y + F^(1-2g)`` for ``tau = F^g t``, ``y = F^-g x``."""
    if F <= 0:
        raise ValueError("F must be positive")
    return SystemSpec(n, advection, 1.0, F**-exponent, F ** (1 - 2 * exponent))


# conserved quantities


@dataclass(frozen=True)
class Invariant:
    name: str
    fn: Callable[[np.ndarray], float]
    applies: Callable[[int], bool] = lambda n: True


def _stride_sum(r: int):
    return lambda x: np.sum(np.asarray(x)[..., r::3], axis=-1)


def _n4_hamiltonian(x) -> np.ndarray:
    """``sqrt 2 (rho0 sin(a0 + pi/4) + rho1 sin(a1 + pi/4))`` from polar coordinates."""
    x = np.asarray(x, dtype=float)
    r0, a0 = np.hypot(x[..., 0], x[..., 2]), np.arctan2(x[..., 2], x[..., 0])
    r1, a1 = np.hypot(x[..., 1], x[..., 3]), np.arctan2(x[..., 3], x[..., 1])
    return np.sqrt(2) * (r0 * np.sin(a0 + np.pi / 4) + r1 * np.sin(a1 + np.pi / 4))


@dataclass(frozen=True)
class InvariantSet:
    """Named state functionals; ``standard()`` holds the ones tracked in audits."""

    items: tuple[Invariant, ...]

    @classmethod
    def standard(cls) -> InvariantSet:
        return cls((
            Invariant("total_sum", lambda x: np.sum(x, axis=-1)),
            Invariant("energy", energy),
            Invariant("even_energy", lambda x: energy(np.asarray(x)[..., 0::2]), lambda n: n % 2 == 0),
            Invariant("odd_energy", lambda x: energy(np.asarray(x)[..., 1::2]), lambda n: n % 2 == 0),
            Invariant("stride3_sum_0", _stride_sum(0), lambda n: n % 3 == 0),
            Invariant("stride3_sum_1", _stride_sum(1), lambda n: n % 3 == 0),
            Invariant("stride3_sum_2", _stride_sum(2), lambda n: n % 3 == 0),
            Invariant("hamiltonian_n4", _n4_hamiltonian, lambda n: n == 4),
        ))

    def select(self, *names: str) -> InvariantSet:
        known = {q.name: q for q in self.items}
        missing = [m for m in names if m not in known]
        if missing:
            raise KeyError(f"unknown invariants {missing}")
        return InvariantSet(tuple(known[m] for m in names))

    @property
    def names(self) -> list[str]:
        return [q.name for q in self.items]


@dataclass(frozen=True)
class AuditReport:
    """Relative drift ``max |Q(x(t)) - Q(x(0))| / max(1, |Q(x(0))|)`` per quantity."""

    drift: dict[str, float]
    initial: dict[str, float]
    inapplicable: tuple[str, ...] = ()

    def max_drift(self) -> float:
        return max(self.drift.values(), default=0.0)


def audit(traj: Trajectory, inv: InvariantSet | None = None) -> AuditReport:
    inv = inv or InvariantSet.standard()
    drift, initial, skipped = {}, {}, []
    for q in inv.items:
        if not q.applies(traj.n):
            skipped.append(q.name)
            continue
        vals = np.asarray(q.fn(traj.states), dtype=float)
        q0 = float(vals[0])
        initial[q.name] = q0
        drift[q.name] = float(np.max(np.abs(vals - q0)) / max(1.0, abs(q0)))
    return AuditReport(drift, initial, tuple(skipped))


# closed-form reductions of the symmetric inviscid system


@dataclass(frozen=True)
class N4Reduction:
    """Polar form of the symmetric inviscid system at ``N = 4``.

    With ``x0 + i x2 = rho0 e^{i a0}`` and ``x1 + i x3 = rho1 e^{i a1}`` the
    radii are constant and the angles obey
    ``a0' = -sqrt2 rho1 cos(a1 + pi/4)``, ``a1' = sqrt2 rho0 cos(a0 + pi/4)``,
    Hamilton's equations for ``H = sqrt2 (rho0 sin(a0 + pi/4) + rho1 sin(a1 + pi/4))``.
    """

    rho0: float
    rho1: float
    alpha0: float
    alpha1: float

    @property
    def degenerate(self) -> bool:
        """An angle is undefined because one radius vanishes."""
        return self.rho0 == 0.0 or self.rho1 == 0.0

    def hamiltonian(self, a0, a1):
        return np.sqrt(2) * (self.rho0 * np.sin(np.asarray(a0) + np.pi / 4)
                             + self.rho1 * np.sin(np.asarray(a1) + np.pi / 4))

    def angle_rhs(self, t, a):
        a0, a1 = a[..., 0], a[..., 1]
        return np.stack([
            -np.sqrt(2) * self.rho1 * np.cos(a1 + np.pi / 4),
            np.sqrt(2) * self.rho0 * np.cos(a0 + np.pi / 4),
        ], axis=-1)

    def angles(self, times, rtol: float = 1e-11, atol: float = 1e-12) -> np.ndarray:
        times = np.asarray(times, dtype=float)
        a_init = np.array([self.alpha0, self.alpha1])
        if times[-1] <= times[0]:
            return np.tile(a_init, (times.size, 1))
        _, a, _ = _int.dopri5(self.angle_rhs, a_init, times[0], times[-1], rtol, atol, times)
        return a

    def reconstruct(self, times) -> np.ndarray:
        a = self.angles(times)
        x = np.empty((a.shape[0], 4))
        x[:, 0], x[:, 2] = self.rho0 * np.cos(a[:, 0]), self.rho0 * np.sin(a[:, 0])
        x[:, 1], x[:, 3] = self.rho1 * np.cos(a[:, 1]), self.rho1 * np.sin(a[:, 1])
        return x


def reduce_n4(x0) -> N4Reduction:
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (4,):
        raise ValueError("reduce_n4 needs a state of length 4")
    return N4Reduction(
        float(np.hypot(x0[0], x0[2])), float(np.hypot(x0[1], x0[3])),
        float(np.arctan2(x0[2], x0[0])), float(np.arctan2(x0[3], x0[1])),
    )


@dataclass(frozen=True)
class N6Reduction:
    """``x_j = c_{j mod 3} + (-1)^j y_{j mod 3} / 2`` with ``y' = 2 c cross y``.

    ``c`` is constant and ``y`` rotates rigidly about ``c`` at angular speed ``2 |c|``.
    """

    c: np.ndarray
    y0: np.ndarray

    def y(self, times) -> np.ndarray:
        t = np.asarray(times, dtype=float)[:, None]
        w = 2.0 * float(np.linalg.norm(self.c))
        if w == 0.0:
            return np.tile(self.y0, (t.shape[0], 1))
        u = 2.0 * self.c / w
        th = w * t
        par = u * np.dot(u, self.y0)
        return (self.y0 * np.cos(th) + np.cross(u, self.y0) * np.sin(th)
                + par * (1 - np.cos(th)))

    @property
    def angular_speed(self) -> float:
        return 2.0 * float(np.linalg.norm(self.c))

    def reconstruct(self, times) -> np.ndarray:
        y = self.y(times)
        sign = np.array([1, -1, 1, -1, 1, -1], dtype=float)
        return np.tile(self.c, 2) + 0.5 * sign * np.tile(y, (1, 2))


def reduce_n6(x0) -> N6Reduction:
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (6,):
        raise ValueError("reduce_n6 needs a state of length 6")
    c = 0.5 * (x0[:3] + x0[3:])
    y = np.array([1, -1, 1]) * (x0[:3] - x0[3:])
    return N6Reduction(c, y)

