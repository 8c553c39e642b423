"""Reproduction harness: attractor ensembles, period detection, wave tracking.

Ensembles are integrated in fixed-size batches that share one adaptive step
size, so results depend only on ``(spec, seed)`` and not on ``jobs``.
Member ``i`` draws its perturbation from ``default_rng([seed, i])``.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from . import integrate as _int
from .dynamics import SystemSpec, Trajectory, integrate_adaptive, make_rhs, random_initial

__all__ = [
    "AttractorClass",
    "EnsembleSummary",
    "NoBracketError",
    "NSBracket",
    "HovmoellerGrid",
    "spatial_period",
    "dominant_wavenumber",
    "temporal_period",
    "ensemble_search",
    "follow_class",
    "ns_bracket",
    "hovmoeller_grid",
    "crest_tracks",
    "crest_speed",
    "phase_speeds",
    "pattern_speed",
    "split_parameters",
    "mode_seed",
]

CLASS_RTOL = 1e-3
BATCH = 20


def spatial_period(x, rtol: float = CLASS_RTOL) -> int:
    """Smallest divisor ``m`` of ``N`` with ``max |x_{i+m} - x_i| <= rtol max |x|``."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("spatial_period expects one state")
    n = x.size
    scale = float(np.max(np.abs(x)))
    if scale == 0.0:
        return 1
    for m in range(1, n + 1):
        if n % m == 0 and np.max(np.abs(np.roll(x, -m) - x)) <= rtol * scale:
            return m
    return n


def dominant_wavenumber(x) -> int:
    """Nonzero wavenumber ``0 < j <= N/2`` with the largest Fourier amplitude."""
    x = np.asarray(x, dtype=float)
    amp = np.abs(np.fft.rfft(x - x.mean()))
    amp[0] = 0.0
    return int(np.argmax(amp))


def _dominant_period(x) -> int:
    n = len(x)
    return n // math.gcd(n, dominant_wavenumber(x))


def temporal_period(traj: Trajectory, site: int = 0, window: float = 50.0, threshold: float = 0.8):
    """Period of ``x_site(t)`` from the first strong autocorrelation peak.

    Uses the last ``window`` time units.  Returns ``None`` for a constant
    signal or when no peak reaches ``threshold`` (irregular motion).
    """
    t = traj.times
    if t[-1] - t[0] < window * (1 - 1e-9):
        raise ValueError(f"trajectory spans {t[-1] - t[0]:.3g} < window {window}")
    m = t >= t[-1] - window - 1e-9
    tt, y = t[m], traj.states[m, site]
    dt = np.diff(tt)
    if not np.allclose(dt, dt[0], rtol=1e-6, atol=1e-9):
        raise ValueError("temporal_period needs a uniform output grid")
    dt = float(dt[0])
    y = y - y.mean()
    if np.std(y) <= 1e-9 * (1 + np.max(np.abs(traj.states[m, site]))):
        return None
    n = y.size
    max_lag = n // 2
    r = np.empty(max_lag)
    for lag in range(max_lag):
        a, b = y[: n - lag], y[lag:]
        r[lag] = np.dot(a, b) / math.sqrt(np.dot(a, a) * np.dot(b, b))
    neg = np.nonzero(r < 0)[0]
    if neg.size == 0:
        return None
    start = neg[0]
    peaks = [i for i in range(start + 1, max_lag - 1) if r[i] >= r[i - 1] and r[i] > r[i + 1]]
    for i in peaks:
        if r[i] >= threshold:
            den = r[i - 1] - 2 * r[i] + r[i + 1]
            off = 0.5 * (r[i - 1] - r[i + 1]) / den if den != 0 else 0.0
            return (i + off) * dt
    return None


@dataclass(frozen=True)
class AttractorClass:
    spatial_period: int
    temporal_period: float | None
    member_count: int
    representative: np.ndarray
    members: tuple[int, ...] = ()

    def to_json(self) -> dict:
        return {
            "spatial_period": self.spatial_period,
            "temporal_period": self.temporal_period,
            "member_count": self.member_count,
            "members": list(self.members),
            "representative": [float(v) for v in self.representative],
        }


@dataclass(frozen=True)
class EnsembleSummary:
    n: int
    F: float
    runs: int
    seed: int
    t_end: float
    classes: tuple[AttractorClass, ...]
    unclassified: int
    final_states: np.ndarray = field(repr=False, default=None)

    @property
    def periods(self) -> set[int]:
        return {c.spatial_period for c in self.classes}

    def to_json(self) -> dict:
        return {
            "N": self.n, "F": self.F, "runs": self.runs, "seed": self.seed, "t_end": self.t_end,
            "classes": [c.to_json() for c in self.classes], "unclassified": self.unclassified,
        }


def _member_initial(spec: SystemSpec, seed: int, i: int, sigma: float | None) -> np.ndarray:
    return random_initial(spec, np.random.default_rng([seed, i]), sigma)


def _run_batch(args):
    spec, x0s, t_end, rtol, atol = args
    f = make_rhs(spec)
    try:
        _, y, _ = _int.dopri5(f, x0s, 0.0, t_end, rtol, atol)
        return [y[-1][i] for i in range(len(x0s))]
    except (_int.BlowUpError, _int.StepSizeError):
        out = []
        for x0 in x0s:
            try:
                _, y, _ = _int.dopri5(f, x0, 0.0, t_end, rtol, atol)
                out.append(y[-1])
            except (_int.BlowUpError, _int.StepSizeError):
                out.append(None)
        return out


def _cycle_period(spec: SystemSpec, x: np.ndarray, window: float = 50.0) -> float | None:
    tr = integrate_adaptive(spec, x, 0.0, window + 10.0, 1e-8, 1e-10, dt_out=0.01)
    return temporal_period(tr, 0, window)


def ensemble_search(
    spec: SystemSpec,
    F: float | None = None,
    runs: int = 100,
    t_end: float = 1000.0,
    seed: int = 0,
    jobs: int = 1,
    sigma: float | None = None,
    rtol: float = 1e-8,
    atol: float = 1e-10,
    batch: int = BATCH,
) -> EnsembleSummary:
    """Integrate ``runs`` perturbed copies of ``F e`` and group final states by spatial period."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    if F is not None:
        spec = spec.with_forcing(F)
    F_val = spec.forcing if spec.is_standard else float("nan")
    x0 = np.array([_member_initial(spec, seed, i, sigma) for i in range(runs)])
    chunks = [(spec, x0[s:s + batch], t_end, rtol, atol) for s in range(0, runs, batch)]
    if jobs > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            parts = list(ex.map(_run_batch, chunks))
    else:
        parts = [_run_batch(c) for c in chunks]
    finals = [x for part in parts for x in part]
    groups: dict[int, list[int]] = {}
    bad = 0
    for i, x in enumerate(finals):
        if x is None or not np.all(np.isfinite(x)):
            bad += 1
            continue
        groups.setdefault(spatial_period(x), []).append(i)
    classes = []
    for m in sorted(groups):
        idx = groups[m]
        rep = finals[idx[0]]
        classes.append(AttractorClass(m, _cycle_period(spec, rep), len(idx), rep, tuple(idx)))
    states = np.array([x if x is not None else np.full(spec.n, np.nan) for x in finals])
    return EnsembleSummary(spec.n, F_val, runs, seed, t_end, tuple(classes), bad, states)


def mode_seed(spec: SystemSpec, mode: int, amplitude: float = 0.1) -> np.ndarray:
    """``F e`` plus a single cosine of the given wavenumber."""
    j = np.arange(spec.n)
    return spec.gamma_at(0.0) + amplitude * np.cos(2 * np.pi * mode * j / spec.n)


class NoBracketError(RuntimeError):
    pass


@dataclass(frozen=True)
class NSBracket:
    estimate: float
    lo: float
    hi: float
    history: tuple[tuple[float, bool], ...]


def follow_class(spec: SystemSpec, x: np.ndarray, m_target: int, t_follow: float,
                 rng: np.random.Generator, kick: float) -> tuple[bool, np.ndarray]:
    """Kick ``x``, integrate ``t_follow`` and report whether class ``m_target`` survived.

    The class counts as lost when the settled state either breaks the
    ``m_target`` shift symmetry or is dominated by a wavenumber of another
    period; the second test notices a drift away from a cycle without
    symmetry long before the new attractor is reached to ``1e-3``.
    """
    x0 = x + kick * rng.standard_normal(spec.n)
    tr = integrate_adaptive(spec, x0, 0.0, t_follow, 1e-8, 1e-10)
    xf = tr.final
    kept = spatial_period(xf) == m_target and _dominant_period(xf) == m_target
    return kept, xf


def ns_bracket(
    spec: SystemSpec,
    m_target: int,
    F_lo: float,
    F_hi: float,
    tol_F: float = 1e-3,
    x_start=None,
    step: float = 0.002,
    t_follow: float = 1000.0,
    seed: int = 0,
    kick: float = 1e-3,
    search_runs: int = 20,
) -> NSBracket:
    """Lower ``F`` from ``F_hi`` following the class ``m_target`` and bisect its loss point.

    Each probe warm-starts from the last state that kept the class.
    Without ``x_start`` a seeded search at ``F_hi`` looks for a member of the class.
    """
    rng = np.random.default_rng([seed, 1])
    hi_spec = spec.with_forcing(F_hi)
    if x_start is None:
        for i in range(search_runs):
            x0 = _member_initial(hi_spec, seed, i, None)
            xf = integrate_adaptive(hi_spec, x0, 0.0, t_follow, 1e-8, 1e-10).final
            if spatial_period(xf) == m_target and _dominant_period(xf) == m_target:
                x_start = xf
                break
        else:
            raise NoBracketError(f"no attractor of period {m_target} found at F = {F_hi}")
    else:
        ok, x_start = follow_class(hi_spec, np.asarray(x_start, float), m_target, t_follow, rng, 0.0)
        if not ok:
            raise NoBracketError(f"period-{m_target} class not stable at F = {F_hi}")
    hist = [(F_hi, True)]
    F_ok, x_ok = F_hi, x_start
    F_lost = None
    n_steps = int(math.floor((F_hi - F_lo) / step + 1e-9))
    for s in range(1, n_steps + 1):
        F = F_hi - s * step
        ok, xf = follow_class(spec.with_forcing(F), x_ok, m_target, t_follow, rng, kick)
        hist.append((F, ok))
        if ok:
            F_ok, x_ok = F, xf
        else:
            F_lost = F
            break
    if F_lost is None:
        raise NoBracketError(f"period-{m_target} class persists down to F = {F_ok}")
    lo, hi = F_lost, F_ok
    while hi - lo > tol_F:
        mid = 0.5 * (lo + hi)
        ok, xf = follow_class(spec.with_forcing(mid), x_ok, m_target, t_follow, rng, kick)
        hist.append((mid, ok))
        if ok:
            hi, x_ok = mid, xf
        else:
            lo = mid
    return NSBracket(0.5 * (lo + hi), lo, hi, tuple(hist))


@dataclass(frozen=True)
class HovmoellerGrid:
    """``values[i, j]`` is the field at ``times[i]`` and fractional site ``sites[j]``."""

    times: np.ndarray
    sites: np.ndarray
    values: np.ndarray
    n: int


def hovmoeller_grid(traj: Trajectory, t_window: tuple[float, float], interpolation: str = "cubic",
                    upsample: int = 8) -> HovmoellerGrid:
    """Site-time raster on ``t_window``, interpolated across sites (periodic cubic spline)."""
    t0, t1 = t_window
    m = (traj.times >= t0 - 1e-9) & (traj.times <= t1 + 1e-9)
    if not m.any():
        raise ValueError(f"empty window [{t0}, {t1}]")
    times, states = traj.times[m], traj.states[m]
    n = states.shape[1]
    sites = np.arange(n * upsample) / upsample
    if interpolation == "cubic":
        ext = np.concatenate([states, states[:, :1]], axis=1)
        spl = CubicSpline(np.arange(n + 1), ext, axis=1, bc_type="periodic")
        vals = spl(sites)
    elif interpolation == "none":
        vals = np.repeat(states, upsample, axis=1)
    else:
        raise ValueError(f"unknown interpolation {interpolation!r}")
    return HovmoellerGrid(times, sites, vals, n)


def _row_crests(row: np.ndarray, sites: np.ndarray, n: int) -> np.ndarray:
    left, right = np.roll(row, 1), np.roll(row, -1)
    idx = np.nonzero((row > left) & (row >= right))[0]
    den = left[idx] - 2 * row[idx] + right[idx]
    off = np.where(den != 0, 0.5 * (left[idx] - right[idx]) / np.where(den != 0, den, 1), 0.0)
    dx = sites[1] - sites[0]
    return np.mod(sites[idx] + off * dx, n)


def crest_tracks(grid: HovmoellerGrid, max_jump: float = 0.5, min_duration: float = 1.0):
    """Follow crests (local maxima across sites) through time.

    Crests in consecutive rows are linked when they lie within ``max_jump``
    sites (periodic distance).  Returns ``(times, unwrapped positions)`` for
    tracks lasting at least ``min_duration``.
    """
    n = grid.n
    active: list[tuple[list, list]] = []
    done = []
    for t, row in zip(grid.times, grid.values):
        crests = _row_crests(row, grid.sites, n)
        used = np.zeros(crests.size, bool)
        still = []
        for tt, pp in active:
            last = pp[-1] % n
            if crests.size:
                d = (crests - last + n / 2) % n - n / 2
                d[used] = np.inf
                j = int(np.argmin(np.abs(d)))
                if abs(d[j]) <= max_jump:
                    used[j] = True
                    tt.append(t)
                    pp.append(pp[-1] + d[j])
                    still.append((tt, pp))
                    continue
            done.append((tt, pp))
        for j in np.nonzero(~used)[0]:
            still.append(([t], [float(crests[j])]))
        active = still
    done.extend(active)
    return [(np.array(tt), np.array(pp)) for tt, pp in done if tt[-1] - tt[0] >= min_duration]


def crest_speed(grid: HovmoellerGrid, **kw) -> tuple[float, np.ndarray]:
    """Median crest velocity (sites per time, negative = leftward) and per-track slopes."""
    tracks = crest_tracks(grid, **kw)
    if not tracks:
        raise ValueError("no crest track long enough")
    slopes = np.array([np.polyfit(t, p, 1)[0] for t, p in tracks])
    return float(np.median(slopes)), slopes


def phase_speeds(traj: Trajectory, t_window: tuple[float, float]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-wavenumber phase velocity on ``t_window`` (negative = leftward).

    Returns ``(k, speed, weight)`` for ``0 < k < N/2`` where the speed comes
    from a linear fit of the unwrapped Fourier phase and ``weight`` is the
    normalized mean power of that wavenumber.
    """
    w = traj.window(*t_window)
    n = w.n
    if len(w.times) < 3:
        raise ValueError("window holds fewer than three samples")
    X = np.fft.fft(w.states, axis=1)
    ks = np.arange(1, (n + 1) // 2)
    speed = np.empty(len(ks))
    for i, k in enumerate(ks):
        slope = np.polyfit(w.times, np.unwrap(np.angle(X[:, k])), 1)[0]
        speed[i] = -slope * n / (2 * np.pi * k)
    power = np.mean(np.abs(X[:, ks]) ** 2, axis=0)
    return ks, speed, power / power.sum()


def pattern_speed(traj: Trajectory, t_window: tuple[float, float]) -> float:
    """Power-weighted median of the per-wavenumber phase velocities.

    For a travelling wave this equals the crest velocity; in irregular regimes
    it tracks the energetic wave packets that plain crest following misses.
    """
    _, speed, weight = phase_speeds(traj, t_window)
    order = np.argsort(speed)
    cum = np.cumsum(weight[order])
    return float(speed[order][np.searchsorted(cum, 0.5)])


def split_parameters(n: int, left: tuple[float, float, float], right: tuple[float, float, float]):
    """Per-site ``(alpha, beta, gamma)`` with one triple on each half of the ring."""
    a = np.empty((3, n))
    a[:, : n // 2] = np.array(left, float)[:, None]
    a[:, n // 2:] = np.array(right, float)[:, None]
    return a[0], a[1], a[2]
