"""Closed-form bifurcation analysis of the constant solution ``F e``.

At ``x = F e`` the linearization of ``G(x) - x + F e`` is ``F A - I`` with
``A`` circulant, so eigenvalues are ``F p(omega^j) - 1``.  A Hopf bifurcation
for ``F > 0`` happens at ``F1 = 1 / max_j Re p(omega^j)``.

The cubic coefficients of the centre-manifold reductions only need the
bilinear symbol ``P(z, w)``, because ``B(q_k, q_l)`` is a multiple of
``q_{k+l}``.  With ``mu_j`` the eigenvalue of mode ``j`` at the bifurcation
point and ``M = 1 / N``:

* first Lyapunov coefficient (Hopf at mode ``k``, ``z1 = omega^k``)::

      I1 = Re( -2 P(z1, z1*) P(z1, 1) / mu_0
               + P(z1, z1) P(z1^2, z1*) / (2 i tau0 - mu_2k) ) * M / (2 tau0)

  with ``mu_0 = -1`` and ``z1`` oriented so that ``tau0 > 0``.

* Hopf-Hopf point (modes ``k``, ``l``; the second pair is moved onto the
  axis by ``alpha0 C_l``)::

      g2100 = ( P(z1,z1) P(z1^2,z1*) / (2i w1 - mu_2k) - 2 P(z1,z1*) P(z1,1) / mu_0 ) M / 2
      g1011 = ( -P(z2,z2*) P(z1,1) / mu_0
                + P(z1,z2*) P(z1 z2*, z2) / (i(w1-w2) - mu_{k-l})
                + P(z1,z2) P(z1 z2, z2*) / (i(w1+w2) - mu_{k+l}) ) M

  and symmetrically for ``g1110`` and ``g0021``; ``p_rs`` are their real parts.

The amplitude equations ``r1' = r1 (mu1 + p11 r1^2 + p12 r2^2)`` and
``r2' = r2 (mu2 + p21 r1^2 + p22 r2^2)`` give the cycle of mode ``l`` a
transverse eigenvalue ``mu1 - (p12/p22) mu2``.  Along ``alpha = 0`` this
crosses zero at ``F3* = F1 - alpha0 / g`` with ``g = R1 p22/p12 - R2`` the
slope ``d alpha / d F`` of the torus curve through the Hopf-Hopf point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize_scalar

from .gmap import G3, GMap
from .spectral import LaurentPoly, bilinear_symbol, fourier_column, laurent_of, unit_root

__all__ = [
    "NoHopfError",
    "HopfHopfDegeneracy",
    "DegenerateError",
    "HopfReport",
    "HopfHopfReport",
    "WaveDiagnostics",
    "Criteria2Local",
    "first_hopf",
    "second_hopf",
    "first_lyapunov",
    "lyapunov_l96",
    "amplitude_slope",
    "first_bifurcation",
    "hopf_criteria_2local",
    "wave_diagnostics",
    "perturbation_matrix",
    "hopf_hopf",
]

TIE_RTOL = 1e-12
RESONANCE_TOL = 1e-10


class NoHopfError(ValueError):
    """No complex pair crosses the imaginary axis for ``F > 0``."""


class HopfHopfDegeneracy(ValueError):
    """Two pairs cross together, so the single-Hopf reduction does not apply."""


class DegenerateError(ValueError):
    """A normal-form denominator vanishes (resonance)."""


@dataclass(frozen=True)
class HopfReport:
    """Hopf point ``F1 p(z1) - 1 = i tau0`` of mode ``mode_k``."""

    n: int
    F1: float
    mode_k: int
    tau0: float
    z1: complex
    I1: float | None = None
    tie: bool = False
    tie_mode: int | None = None

    @property
    def supercritical(self) -> bool | None:
        return None if self.I1 is None else bool(self.I1 < 0)

    @property
    def spatial_period(self) -> int:
        return self.n // math.gcd(self.n, self.mode_k)

    def to_json(self) -> dict:
        return {
            "N": self.n, "F1": self.F1, "mode_k": self.mode_k, "tau0": self.tau0,
            "z1": [self.z1.real, self.z1.imag], "I1": self.I1,
            "supercritical": self.supercritical, "tie": self.tie, "tie_mode": self.tie_mode,
            "spatial_period": self.spatial_period,
        }


def _ranked_modes(p: LaurentPoly, n: int):
    """Modes ``0 < j < n/2`` with positive real part, best first."""
    j = np.arange(1, (n + 1) // 2)
    vals = p(unit_root(n, j))
    keep = vals.real > 0
    cand = sorted(zip(j[keep], vals[keep]), key=lambda jv: (-jv[1].real, jv[0]))
    if not cand:
        return []
    # snap near-ties to the leader so ordering falls back to the mode index
    top = cand[0][1].real
    cand = sorted(cand, key=lambda jv: (-(top if abs(top - jv[1].real) <= TIE_RTOL * top else jv[1].real), jv[0]))
    return [(int(a), complex(v)) for a, v in cand]


def _report(n: int, j: int, v: complex, **kw) -> HopfReport:
    # orient the pair so that tau0 >= 0: z1 is omega^j or its conjugate
    z = unit_root(n, j)
    if v.imag < 0:
        z, v = z.conjugate(), v.conjugate()
    F = 1.0 / v.real
    return HopfReport(n, F, j, F * v.imag, z, **kw)


def first_hopf(p: LaurentPoly, n: int) -> HopfReport:
    """First complex pair crossing for ``F > 0`` (ties flagged, smallest mode kept)."""
    cand = _ranked_modes(p, n)
    if not cand:
        raise NoHopfError("no Hopf for F>0: every mode has Re p(omega^j) <= 0")
    j, v = cand[0]
    if abs(v.imag) <= 1e-12 * max(1.0, abs(v.real)):
        raise NoHopfError(f"no Hopf for F>0: first crossing (mode {j}) is real")
    tie_mode = None
    if len(cand) > 1 and (v.real - cand[1][1].real) <= TIE_RTOL * v.real:
        tie_mode = cand[1][0]
    return _report(n, j, v, tie=tie_mode is not None, tie_mode=tie_mode)


def second_hopf(p: LaurentPoly, n: int) -> HopfReport:
    """Second crossing pair; on an exact tie it coincides with the first (``F2 = F1``)."""
    cand = _ranked_modes(p, n)
    if len(cand) < 2:
        raise NoHopfError("fewer than two modes cross the imaginary axis for F>0")
    j, v = cand[1]
    return _report(n, j, v, tie=(cand[0][1].real - v.real) <= TIE_RTOL * v.real, tie_mode=cand[0][0])


def first_lyapunov(g: GMap, n: int) -> HopfReport:
    """Hopf report of ``G(x) - x + F e`` with the first Lyapunov coefficient."""
    p = laurent_of(g)
    rep = first_hopf(p, n)
    if rep.tie:
        raise HopfHopfDegeneracy(
            f"modes {rep.mode_k} and {rep.tie_mode} cross together at F = {rep.F1:.12g}; use hopf_hopf"
        )
    P = bilinear_symbol(g)
    z1, tau0 = rep.z1, rep.tau0
    d2 = 2j * tau0 - (rep.F1 * p(z1**2) - 1.0)
    if abs(d2) < RESONANCE_TOL:
        raise DegenerateError(f"resonance: 2 i tau0 is an eigenvalue (mode {2 * rep.mode_k % n})")
    z1c = np.conj(z1)
    val = 2 * P(z1, z1c) * P(z1, 1.0) + P(z1, z1) * P(z1**2, z1c) / d2
    I1 = float(np.real(val)) / (2 * tau0 * n)
    return replace(rep, I1=I1)


def lyapunov_l96(n: int) -> float:
    """Specialized first Lyapunov coefficient for ``G3``.

    ``I1 = 4/(2 tau0 N) ( -(cos t - cos 2t)^2 + (cos 3t - 1) Re 1/(2 i tau0 + 1 - F1 p(z1^2)) )``
    with ``t = 2 pi k / N``.
    """
    p = laurent_of(G3)
    rep = first_hopf(p, n)
    if rep.tie:
        raise HopfHopfDegeneracy(f"tie at N = {n}")
    t = 2 * np.pi * rep.mode_k / n
    frac = 1.0 / (2j * rep.tau0 + 1 - rep.F1 * p(rep.z1**2))
    return 4 / (2 * rep.tau0 * n) * (-(np.cos(t) - np.cos(2 * t)) ** 2 + (np.cos(3 * t) - 1) * frac.real)


def amplitude_slope(rep: HopfReport) -> float:
    """Predicted ``d ||x - F e||^2 / dF`` on the emerging cycle.

    With ``Re c1 = tau0 I1`` and eigenvalue speed ``Re p(z1) = 1/F1`` the
    complex amplitude obeys ``|w|^2 = -(F - F1) / (F1 tau0 I1)``; the real
    state carries ``w q + conj(w q)``, whose squared norm is ``2 |w|^2``.
    """
    if rep.I1 is None:
        raise ValueError("report has no Lyapunov coefficient")
    return -2.0 / (rep.F1 * rep.tau0 * rep.I1)


@dataclass(frozen=True)
class Criteria2Local:
    has_hopf_Fpos: bool
    has_hopf_Fneg: bool
    condition1: bool
    condition2: bool
    s1: float | None
    s2: float | None
    first_bif_type_Fpos: str
    first_bif_type_Fneg: str


def first_bifurcation(p: LaurentPoly, n: int | None = None, sign: int = 1, samples: int = 20000) -> str:
    """Type of the first instability of ``F e`` as ``|F|`` grows with ``sign(F) = sign``.

    Works on the continuous curve: ``'none'`` if ``sign Re p <= 0`` everywhere,
    ``'pitchfork'`` if the maximum sits where ``Im p = 0`` (``s = 1/2`` only
    when ``n`` is even, else the neighbouring complex modes give ``'hopf'``),
    otherwise ``'hopf'``.
    """
    s = np.linspace(0.0, 0.5, samples + 1)
    re = sign * p.real_part(s)
    if re.max() <= 1e-12:
        return "none"
    i = int(np.argmax(re))
    # refine the maximizer on the trigonometric polynomial
    lo, hi = s[max(i - 1, 0)], s[min(i + 1, samples)]
    res = minimize_scalar(lambda u: -sign * p.real_part(u), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-13})
    s_star = float(res.x) if -res.fun >= re[i] else float(s[i])
    if abs(s_star - 0.5) < 1e-7:
        return "pitchfork" if (n is None or n % 2 == 0) else "hopf"
    if abs(p.imag_part(s_star)) < 1e-9:
        return "pitchfork"
    return "hopf"


def hopf_criteria_2local(p: LaurentPoly, n: int | None = None) -> Criteria2Local:
    """Closed-form Hopf test for symbols supported in ``[-2, 2]``.

    With ``R1 = d1 + d-1`` and ``R2 = d2 + d-2`` the real part
    ``R1 (cos th - 1) + R2 (cos 2th - 1)`` has an interior critical point at
    ``cos th1 = -R1 / (4 R2)`` iff ``|R1| < 4 |R2|`` (condition 1), where the
    imaginary part is nonzero iff ``2 R2 (d1 - d-1) != R1 (d2 - d-2)``
    (condition 2).
    """
    if p.k > 2:
        raise ValueError("hopf_criteria_2local needs a symbol supported in [-2, 2]")
    d = p.coeffs
    dm2, dm1, d1, d2 = (d.get(j, 0.0) for j in (-2, -1, 1, 2))
    R1, R2 = d1 + dm1, d2 + dm2
    cond1 = abs(R1) < 4 * abs(R2)
    cond2 = not math.isclose(2 * R2 * (d1 - dm1), R1 * (d2 - dm2), rel_tol=1e-12, abs_tol=1e-14)
    s1 = s2 = None
    if cond1:
        s1 = math.acos(-R1 / (4 * R2)) / (2 * math.pi)
        s2 = 1.0 - s1
    pos = first_bifurcation(p, n, +1)
    neg = first_bifurcation(p, n, -1)
    return Criteria2Local(pos == "hopf", neg == "hopf", cond1, cond2, s1, s2, pos, neg)


@dataclass(frozen=True)
class WaveDiagnostics:
    s1: float
    wavelength_sites: float
    phase_velocity: float
    group_velocity: float

    def to_json(self) -> dict:
        return dict(self.__dict__)


def wave_diagnostics(p: LaurentPoly, n: int, F: float | None = None) -> WaveDiagnostics:
    """Linear phase and group velocity (sites per unit time) of the first Hopf mode.

    A mode ``exp(i(2 pi s j + F Lambda_I(s) t))`` has crests moving at
    ``c_p = -F Lambda_I(s) / (2 pi s)``; the envelope moves at
    ``c_g = -F Lambda_I'(s) / (2 pi)``.  ``F`` defaults to ``F1``.
    """
    rep = first_hopf(p, n)
    F = rep.F1 if F is None else F
    s = rep.mode_k / n
    cp = -F * float(p.imag_part(s)) / (2 * math.pi * s)
    cg = -F * float(p.imag_part_derivative(s)) / (2 * math.pi)
    return WaveDiagnostics(s, 1.0 / s, cp, cg)


def perturbation_matrix(n: int, l: int) -> np.ndarray:
    """Rank-2 symmetric circulant ``C_l = q_l q_{N-l}^T + q_{N-l} q_l^T``."""
    if not 0 < l < n:
        raise ValueError(f"need 0 < l < N, got l = {l}")
    if 2 * l == n:
        raise ValueError("l = N/2 gives a real Fourier column; C_l would be rank 1")
    ql, qm = fourier_column(n, l), fourier_column(n, n - l)
    c = np.outer(ql, qm) + np.outer(qm, ql)
    return c.real


@dataclass(frozen=True)
class HopfHopfReport:
    n: int
    mode_k: int
    mode_l: int
    F1: float
    F2: float
    alpha0: float
    tau1: float
    tau2: float
    p: np.ndarray
    F3_star: float
    slope: float | None

    @property
    def simple(self) -> bool:
        return bool(self.p[0, 0] * self.p[1, 1] > 0)

    @property
    def type_one(self) -> bool:
        return bool(self.p[0, 0] * self.p[1, 1] - self.p[0, 1] * self.p[1, 0] < 0)

    @property
    def m1(self) -> int:
        return self.n // math.gcd(self.n, self.mode_k)

    @property
    def m2(self) -> int:
        return self.n // math.gcd(self.n, self.mode_l)

    def to_json(self) -> dict:
        return {
            "N": self.n, "mode_k": self.mode_k, "mode_l": self.mode_l, "F1": self.F1, "F2": self.F2,
            "alpha0": self.alpha0, "tau1": self.tau1, "tau2": self.tau2,
            "p": [[float(v) for v in row] for row in self.p], "F3_star": self.F3_star,
            "slope": self.slope, "simple": self.simple, "type_one": self.type_one,
            "m1": self.m1, "m2": self.m2,
        }


def hopf_hopf(g: GMap, n: int) -> HopfHopfReport:
    """Normal-form coefficients at the Hopf-Hopf point of ``F A - I + alpha C_l``."""
    p = laurent_of(g)
    h1, h2 = first_hopf(p, n), second_hopf(p, n)
    k, l = h1.mode_k, h2.mode_k
    F1, F2 = h1.F1, h2.F1
    alpha0 = (F2 - F1) / F2
    P = bilinear_symbol(g)
    z1, z2 = h1.z1, h2.z1
    c = np.conj
    w1 = F1 * p(z1).imag
    w2 = F1 * p(z2).imag

    def mu(z):
        # eigenvalue of F1 A - I + alpha0 C_l on the Fourier mode with root z
        on_l = min(abs(z - z2), abs(z - c(z2))) < 1e-9
        return F1 * p(z) - 1.0 + (alpha0 if on_l else 0.0)

    def den(v, what):
        if abs(v) < RESONANCE_TOL:
            raise DegenerateError(f"resonant denominator ({what})")
        return v

    mu0 = mu(1.0 + 0j)
    g2100 = 0.5 * (P(z1, z1) * P(z1**2, c(z1)) / den(2j * w1 - mu(z1**2), "2 i tau1")
                   - 2 * P(z1, c(z1)) * P(z1, 1.0) / mu0) / n
    g0021 = 0.5 * (P(z2, z2) * P(z2**2, c(z2)) / den(2j * w2 - mu(z2**2), "2 i tau2")
                   - 2 * P(z2, c(z2)) * P(z2, 1.0) / mu0) / n
    g1011 = (-P(z2, c(z2)) * P(z1, 1.0) / mu0
             + P(z1, c(z2)) * P(z1 * c(z2), z2) / den(1j * (w1 - w2) - mu(z1 * c(z2)), "i(tau1 - tau2)")
             + P(z1, z2) * P(z1 * z2, c(z2)) / den(1j * (w1 + w2) - mu(z1 * z2), "i(tau1 + tau2)")) / n
    g1110 = (-P(z1, c(z1)) * P(z2, 1.0) / mu0
             + P(c(z1), z2) * P(z1, c(z1) * z2) / den(1j * (w2 - w1) - mu(c(z1) * z2), "i(tau2 - tau1)")
             + P(z1, z2) * P(z1 * z2, c(z1)) / den(1j * (w1 + w2) - mu(z1 * z2), "i(tau1 + tau2)")) / n
    pm = np.array([[g2100.real, g1011.real], [g1110.real, g0021.real]])
    R1, R2 = p(z1).real, p(z2).real
    if alpha0 <= TIE_RTOL:
        # exact tie: both pairs cross at F1 and the torus curve starts there
        F3, slope = F1, None
    else:
        slope = R1 * pm[1, 1] / pm[0, 1] - R2
        F3 = F1 - alpha0 / slope
    return HopfHopfReport(n, k, l, F1, F2, alpha0, w1, w2, pm, float(F3), slope)
