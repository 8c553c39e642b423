"""Circulant and Fourier machinery for linearizations at constant states.

The Jacobian of an equivariant map at ``e = (1, ..., 1)`` is circulant, so its
eigenvalues are the values of a Laurent polynomial at the N-th unit roots and
its eigenvectors are the Fourier columns ``q_l``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gmap import GMap

__all__ = [
    "LaurentPoly",
    "BilinearSymbol",
    "EigenCurve",
    "unit_root",
    "laurent_of",
    "eigenvalues",
    "eigen_curve",
    "bilinear_symbol",
    "fourier_column",
    "fourier_matrix",
    "circulant",
    "torus_zero_check",
    "curve_crossings",
]


def unit_root(n: int, j) -> complex | np.ndarray:
    """``omega_n^j`` from cos/sin of ``2 pi j / n`` (no repeated multiplication)."""
    th = 2.0 * np.pi * (np.asarray(j) % n) / n
    out = np.cos(th) + 1j * np.sin(th)
    return complex(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class LaurentPoly:
    """Real Laurent polynomial ``sum_j d_j z^j`` stored as sorted ``(j, d_j)`` pairs."""

    terms: tuple[tuple[int, float], ...]

    def __post_init__(self):
        acc: dict[int, float] = {}
        for j, d in self.terms:
            acc[int(j)] = acc.get(int(j), 0.0) + float(d)
        object.__setattr__(
            self, "terms", tuple((j, d) for j, d in sorted(acc.items()) if d != 0.0)
        )

    @classmethod
    def from_dict(cls, coeffs: dict[int, float]) -> LaurentPoly:
        return cls(tuple(coeffs.items()))

    @property
    def coeffs(self) -> dict[int, float]:
        return dict(self.terms)

    def coeff(self, j: int) -> float:
        return self.coeffs.get(j, 0.0)

    @property
    def k(self) -> int:
        return max((abs(j) for j, _ in self.terms), default=0)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for j, d in self.terms:
            out = out + d * z**j
        return complex(out) if out.ndim == 0 else out

    def reflect(self) -> LaurentPoly:
        """``z -> p(1/z)``, the polynomial of the reflected map."""
        return LaurentPoly(tuple((-j, d) for j, d in self.terms))

    def real_part(self, s):
        """``Lambda_R(s) = sum d_j cos(2 pi j s)``."""
        s = np.asarray(s, dtype=float)
        return sum(d * np.cos(2 * np.pi * j * s) for j, d in self.terms) + 0 * s

    def imag_part(self, s):
        """``Lambda_I(s) = sum d_j sin(2 pi j s)``."""
        s = np.asarray(s, dtype=float)
        return sum(d * np.sin(2 * np.pi * j * s) for j, d in self.terms) + 0 * s

    def imag_part_derivative(self, s):
        """Analytic ``d Lambda_I / ds``."""
        s = np.asarray(s, dtype=float)
        return sum(2 * np.pi * j * d * np.cos(2 * np.pi * j * s) for j, d in self.terms) + 0 * s

    def first_row(self, n: int) -> np.ndarray:
        """First row of the circulant with this symbol (exponents folded mod n)."""
        row = np.zeros(n)
        for j, d in self.terms:
            row[j % n] += d
        return row

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(abs(d) <= tol for _, d in self.terms)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"{d:g} z^{j}" for j, d in self.terms).replace("+ -", "- ")


@dataclass(frozen=True)
class BilinearSymbol:
    """``P_B(z, w) = sum c (z^a w^b + z^b w^a)`` over the terms of a G-map."""

    terms: tuple[tuple[int, int, float], ...]

    def __call__(self, z, w):
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=complex)
        out = np.zeros(np.broadcast_shapes(z.shape, w.shape), dtype=complex)
        for a, b, c in self.terms:
            out = out + c * (z**a * w**b + z**b * w**a)
        return complex(out) if out.ndim == 0 else out

    def linear_part(self) -> LaurentPoly:
        """``p(z) = P_B(z, 1)``."""
        acc: dict[int, float] = {}
        for a, b, c in self.terms:
            acc[a] = acc.get(a, 0.0) + c
            acc[b] = acc.get(b, 0.0) + c
        return LaurentPoly.from_dict(acc)


def bilinear_symbol(g: GMap) -> BilinearSymbol:
    return BilinearSymbol(tuple((t.a, t.b, float(t.coeff)) for t in g.terms))


def laurent_of(g: GMap) -> LaurentPoly:
    """Symbol of ``linearize_at(g, e)``: ``d_m = sum c (delta_{a,m} + delta_{b,m})``."""
    return bilinear_symbol(g).linear_part()


def eigenvalues(p: LaurentPoly, n: int, F: float = 1.0, shift: float = -1.0) -> np.ndarray:
    """``F p(omega^j) + shift`` for ``j = 0..n-1`` (shift -1 gives the damped system)."""
    if n < 2 * p.k + 2:
        raise ValueError(f"need N >= {2 * p.k + 2} for a {p.k}-localized symbol")
    return F * p(unit_root(n, np.arange(n))) + shift


@dataclass(frozen=True)
class EigenCurve:
    s: np.ndarray
    values: np.ndarray
    j: np.ndarray
    points: np.ndarray


def eigen_curve(p: LaurentPoly, n: int, F: float = 1.0, samples: int = 721) -> EigenCurve:
    """Closed curve ``F p(e^{2 pi i s})`` plus the discrete eigenvalues at size ``n``."""
    s = np.linspace(0.0, 1.0, samples)
    vals = F * p(np.exp(2j * np.pi * s))
    j = np.arange(n)
    return EigenCurve(s, vals, j, eigenvalues(p, n, F, shift=0.0))


def fourier_column(n: int, l: int) -> np.ndarray:
    """``q_l`` with entries ``omega^{k l} / sqrt(n)``."""
    if not 0 <= l < n:
        raise IndexError(f"Fourier index must be in [0, {n}), got {l}")
    return unit_root(n, np.arange(n) * l) / np.sqrt(n)


def fourier_matrix(n: int) -> np.ndarray:
    k = np.arange(n)
    return unit_root(n, np.outer(k, k)) / np.sqrt(n)


def circulant(row) -> np.ndarray:
    """Circulant with the given first row: ``C[i, (i + m) % n] = row[m]``."""
    row = np.asarray(row)
    n = row.size
    idx = (np.arange(n)[None, :] - np.arange(n)[:, None]) % n
    return row[idx]


def torus_zero_check(symbol: BilinearSymbol, grid: int = 360, tol: float | None = None):
    """Grid points ``(z, w)`` on the torus where ``|P(z, w)|`` is below ``tol``.

    The default tolerance is ``1e-9`` times the largest ``|P|`` on the grid,
    so zeros that fall on grid points are reported and near misses are not.
    """
    if grid < 12:
        raise ValueError("grid must be at least 12")
    z = unit_root(grid, np.arange(grid))
    vals = np.abs(symbol(z[:, None], z[None, :]))
    if tol is None:
        tol = 1e-9 * max(1.0, float(vals.max()))
    iz, iw = np.nonzero(vals < tol)
    return [(complex(z[a]), complex(z[b])) for a, b in zip(iz, iw)]


def curve_crossings(p: LaurentPoly, samples: int = 4096) -> dict[str, int]:
    """Countable shape features of the eigenvalue curve.

    ``real_axis`` counts sign changes of ``Lambda_I`` over one turn (zeros are
    counted once each), ``right_lobes`` counts maximal arcs with ``Lambda_R > 0``.
    """
    s = (np.arange(samples) + 0.5) / samples
    im = p.imag_part(s)
    re = p.real_part(s)
    sgn = np.sign(im)
    real_axis = int(np.sum(sgn != np.roll(sgn, -1)))
    pos = re > 1e-12
    if pos.all():
        lobes = 1
    else:
        lobes = int(np.sum(pos & ~np.roll(pos, 1)))
    return {"real_axis": real_axis, "right_lobes": lobes}
