"""Quadratic advection terms on a ring of sites (G-maps).

A G-map is stored by its component-0 expression: a sum of monomials
``c * x_{i+a} * x_{i+b}`` with ``a <= b``.  Equivariance under the cyclic
rotation makes the remaining components redundant, so a map is instantiable
at any site count ``N >= 2k + 2`` where ``k`` is the localization radius.

Coefficients are kept as :class:`fractions.Fraction` whenever they are
rational, which lets the energy-preservation check run in exact arithmetic.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from numbers import Rational, Real

import numpy as np

__all__ = [
    "Monomial",
    "GMap",
    "GMapExpr",
    "GMapSyntaxError",
    "EnergyCertificate",
    "evaluate",
    "bilinear",
    "linearize_at",
    "is_energy_preserving",
    "basis",
    "tilde",
    "parse",
    "named",
    "energy_constraint_matrix",
    "linearization_kernel_dim",
    "G0", "G1", "G2", "G3", "G4", "G5", "G6", "G7", "G8",
]


def _normalize_coeff(c):
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (bool, np.bool_)):
        raise TypeError("boolean coefficient")
    if isinstance(c, (int, np.integer, Rational)):
        return Fraction(int(c)) if isinstance(c, (int, np.integer)) else Fraction(c)
    if isinstance(c, (float, np.floating, Real)):
        c = float(c)
        if not np.isfinite(c):
            raise ValueError("coefficient must be finite")
        return c
    raise TypeError(f"unsupported coefficient type {type(c).__name__}")


@dataclass(frozen=True, order=True)
class Monomial:
    """The contribution ``coeff * x_{i+a} * x_{i+b}`` to component ``i``."""

    a: int
    b: int
    coeff: Fraction | float = Fraction(1)

    def __post_init__(self):
        if self.a > self.b:
            raise ValueError(f"offsets must satisfy a <= b, got ({self.a}, {self.b})")
        object.__setattr__(self, "a", int(self.a))
        object.__setattr__(self, "b", int(self.b))
        object.__setattr__(self, "coeff", _normalize_coeff(self.coeff))

    @property
    def offsets(self) -> tuple[int, int]:
        return (self.a, self.b)


@dataclass(frozen=True)
class GMap:
    """Canonical sum of monomials: sorted by offsets, merged, zeros dropped."""

    terms: tuple[Monomial, ...] = ()
    name: str = field(default="", compare=False)

    def __post_init__(self):
        acc: dict[tuple[int, int], Fraction | float] = {}
        for t in self.terms:
            if not isinstance(t, Monomial):
                t = Monomial(*t)
            key = t.offsets
            acc[key] = acc.get(key, 0) + t.coeff
        merged = tuple(
            Monomial(a, b, c) for (a, b), c in sorted(acc.items()) if c != 0
        )
        object.__setattr__(self, "terms", merged)

    @classmethod
    def from_terms(cls, terms, name: str = "") -> GMap:
        """Build from ``(a, b, c)`` triples; offsets are put in order."""
        mons = []
        for a, b, c in terms:
            a, b = sorted((int(a), int(b)))
            mons.append(Monomial(a, b, c))
        return cls(tuple(mons), name)

    @property
    def k(self) -> int:
        """Localization radius: max absolute offset (0 for the zero map)."""
        return max((max(abs(t.a), abs(t.b)) for t in self.terms), default=0)

    @property
    def min_sites(self) -> int:
        return 2 * self.k + 2

    @property
    def is_rational(self) -> bool:
        return all(isinstance(t.coeff, Fraction) for t in self.terms)

    def check_size(self, n: int, allow_aliasing: bool = False) -> None:
        """Reject ``n < 2k + 2`` unless aliased offsets are explicitly allowed."""
        if allow_aliasing:
            if n < 1:
                raise ValueError("need at least one site")
            return
        if n < self.min_sites:
            raise ValueError(
                f"{self.label()} is {self.k}-localized and needs N >= {self.min_sites}, got N = {n}"
            )

    def label(self) -> str:
        return self.name or self.formula()

    def formula(self) -> str:
        """Component-0 expression, e.g. ``x_1^2 - x_0 x_-1``."""
        if not self.terms:
            return "0"
        parts = []
        for t in self.terms:
            c = t.coeff
            mono = f"x_{t.a}^2" if t.a == t.b else f"x_{t.a} x_{t.b}"
            mag = abs(c)
            coef = "" if mag == 1 else f"{mag} "
            sign = "-" if c < 0 else "+"
            parts.append((sign, coef + mono))
        head_sign, head = parts[0]
        out = ("-" if head_sign == "-" else "") + head
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def q_entries(self) -> dict[tuple[int, int], Fraction | float]:
        """Symmetric component-0 matrix ``Q`` as a sparse offset map."""
        q: dict[tuple[int, int], Fraction | float] = {}
        for t in self.terms:
            if t.a == t.b:
                q[(t.a, t.a)] = q.get((t.a, t.a), 0) + 2 * t.coeff
            else:
                q[(t.a, t.b)] = q.get((t.a, t.b), 0) + t.coeff
                q[(t.b, t.a)] = q.get((t.b, t.a), 0) + t.coeff
        return q

    def to_json(self) -> dict:
        return {"terms": [{"a": t.a, "b": t.b, "c": float(t.coeff)} for t in self.terms]}

    @classmethod
    def from_json(cls, data: dict) -> GMap:
        try:
            return cls.from_terms([(d["a"], d["b"], d["c"]) for d in data["terms"]])
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed G-map JSON: {exc}") from exc

    def __call__(self, x):
        return evaluate(self, x)

    def __add__(self, other: GMap) -> GMap:
        if not isinstance(other, GMap):
            return NotImplemented
        return GMap(self.terms + other.terms)

    def __neg__(self) -> GMap:
        return GMap(tuple(Monomial(t.a, t.b, -t.coeff) for t in self.terms))

    def __sub__(self, other: GMap) -> GMap:
        if not isinstance(other, GMap):
            return NotImplemented
        return self + (-other)

    def __rmul__(self, s) -> GMap:
        s = _normalize_coeff(s)
        return GMap(tuple(Monomial(t.a, t.b, s * t.coeff) for t in self.terms))

    __mul__ = __rmul__


@lru_cache(maxsize=256)
def _index_terms(g: GMap, n: int):
    """Per-term index arrays ``(i+a) mod n``, ``(i+b) mod n`` and float coefficient."""
    i = np.arange(n)
    return tuple(((i + t.a) % n, (i + t.b) % n, float(t.coeff)) for t in g.terms)


def _as_state(x) -> np.ndarray:
    x = np.asarray(x)
    # complex input (Fourier modes) passes through; everything else is real
    x = x.astype(complex if np.iscomplexobj(x) else float, copy=False)
    if x.ndim == 0:
        raise ValueError("state must be a vector")
    return x


def evaluate(g: GMap, x, allow_aliasing: bool = False) -> np.ndarray:
    """``G(x)``; accepts a single state or a stack of states along the last axis.

    ``allow_aliasing`` permits ``N < 2k + 2``, where distinct offsets coincide
    modulo ``N`` (e.g. the four-site symmetric system).
    """
    x = _as_state(x)
    n = x.shape[-1]
    g.check_size(n, allow_aliasing)
    out = np.zeros_like(x)
    for ia, ib, c in _index_terms(g, n):
        out += c * (x[..., ia] * x[..., ib])
    return out


def bilinear(g: GMap, x, y, allow_aliasing: bool = False) -> np.ndarray:
    """Symmetric bilinear form ``B(x, y)`` with ``B(x, x) = 2 G(x)``."""
    x, y = _as_state(x), _as_state(y)
    if x.shape[-1] != y.shape[-1]:
        raise ValueError(f"length mismatch: {x.shape[-1]} vs {y.shape[-1]}")
    n = x.shape[-1]
    g.check_size(n, allow_aliasing)
    out = np.zeros(np.broadcast_shapes(x.shape, y.shape), dtype=np.result_type(x, y))
    for ia, ib, c in _index_terms(g, n):
        out += c * (x[..., ia] * y[..., ib] + y[..., ia] * x[..., ib])
    return out


def linearize_at(g: GMap, x0, allow_aliasing: bool = False) -> np.ndarray:
    """Dense Jacobian ``A[x0]`` of ``G`` at ``x0``, so that ``A y = B(x0, y)``."""
    x0 = _as_state(x0)
    if x0.ndim != 1:
        raise ValueError("linearize_at expects a single state vector")
    n = x0.size
    g.check_size(n, allow_aliasing)
    a = np.zeros((n, n))
    rows = np.arange(n)
    for ia, ib, c in _index_terms(g, n):
        np.add.at(a, (rows, ib), c * x0[ia])
        np.add.at(a, (rows, ia), c * x0[ib])
    return a


def tilde(g: GMap) -> GMap:
    """Reflection conjugate: ``(a, b) -> (-b, -a)``."""
    name = ""
    if g.name:
        name = g.name[1:] if g.name.startswith("~") else "~" + g.name
    return GMap(tuple(Monomial(-t.b, -t.a, t.coeff) for t in g.terms), name)


@dataclass(frozen=True)
class EnergyCertificate:
    """Outcome of the cyclic ``Q`` test.

    ``violations`` lists each offending triple ``(0, u, v)`` (normalized so the
    smallest offset is zero) together with its nonzero coefficient sum.
    """

    ok: bool
    exact: bool
    violations: tuple[tuple[tuple[int, int, int], Fraction | float], ...] = ()

    def __bool__(self) -> bool:
        return self.ok


def is_energy_preserving(g: GMap, tol: float = 1e-12) -> EnergyCertificate:
    """Exact (rational) or tolerance-based test of ``x^T G(x) = 0``.

    ``sum_i x_i G(x)_i`` collects, for every term, the cubic monomial over the
    offset triple ``{0, a, b}``.  Energy preservation holds iff the coefficient
    sums vanish for every triple class modulo translation, which is the cyclic
    condition on ``Q`` written without reference to ``N``.
    """
    sums: dict[tuple[int, ...], Fraction | float] = {}
    for t in g.terms:
        tri = sorted((0, t.a, t.b))
        key = tuple(v - tri[0] for v in tri)
        sums[key] = sums.get(key, 0) + t.coeff
    exact = g.is_rational
    if exact:
        bad = [(k, v) for k, v in sorted(sums.items()) if v != 0]
    else:
        scale = max((abs(float(t.coeff)) for t in g.terms), default=1.0)
        bad = [(k, v) for k, v in sorted(sums.items()) if abs(float(v)) > tol * scale]
    return EnergyCertificate(not bad, exact, tuple(bad))


def _m(name: str, *terms) -> GMap:
    return GMap.from_terms(terms, name)


G1 = _m("G1", (1, 1, 1), (0, -1, -1))
G2 = _m("G2", (2, 2, 1), (0, -2, -1))
G3 = _m("G3", (-1, 1, 1), (-2, -1, -1))
G4 = _m("G4", (3, 3, 1), (0, -3, -1))
G5 = _m("G5", (2, 3, 1), (-2, 1, -1))
G6 = _m("G6", (1, 3, 1), (-1, 2, -1))


def _rename(g: GMap, name: str) -> GMap:
    return GMap(g.terms, name)


G7 = _rename(G3 - tilde(G3), "G7")
G8 = _rename(G5 - tilde(G6), "G8")
G0 = _rename(G3 - 2 * tilde(G3) + tilde(G1) - G2, "G0")

_NAMED = {f"G{i}": g for i, g in enumerate((G0, G1, G2, G3, G4, G5, G6, G7, G8))}


def named(name: str) -> GMap:
    """Look up ``G0`` ... ``G8`` or a tilde form ``~Gd``."""
    key = name.strip()
    flip = key.startswith("~")
    key = key.lstrip("~").strip()
    if key not in _NAMED:
        raise KeyError(f"unknown G-map name {name!r}")
    g = _NAMED[key]
    return tilde(g) if flip else g


def basis(k: int) -> list[GMap]:
    """Basis of the k-localized maps for ``k`` in {1, 2, 3}."""
    if k not in (1, 2, 3):
        raise ValueError(f"basis is available for k in {{1, 2, 3}}, got {k}")
    order = [G1, G2, G3, G4, G5, G6][: {1: 1, 2: 3, 3: 6}[k]]
    return [h for g in order for h in (g, tilde(g))]


def energy_constraint_matrix(k: int, n: int) -> np.ndarray:
    """Integer matrix of the cyclic ``Q`` conditions for a k-localized map at size ``n``.

    Unknowns are the upper-triangular ``Q_rs`` with ``-k <= r <= s <= k``;
    one row per ordered pair ``(i, j)`` of residues mod ``n``.  Offsets are
    represented in ``(-n/2, n/2]`` so entries outside the window are zero.
    """
    if n < 2 * k + 2:
        raise ValueError(f"need n >= {2 * k + 2}")
    pairs = [(r, s) for r in range(-k, k + 1) for s in range(r, k + 1)]
    col = {p: c for c, p in enumerate(pairs)}

    def rep(v: int) -> int:
        v %= n
        return v - n if v > n // 2 else v

    def idx(r: int, s: int):
        r, s = rep(r), rep(s)
        key = (min(r, s), max(r, s))
        return col.get(key)

    rows = []
    for i, j in itertools.product(range(n), repeat=2):
        row = np.zeros(len(pairs), dtype=np.int64)
        for r, s in ((i, j), (i - j, -j), (j - i, -i)):
            c = idx(r, s)
            if c is not None:
                row[c] += 1
        if row.any():
            rows.append(row)
    return np.unique(np.array(rows), axis=0)


def _laurent_vector(g: GMap, k: int) -> np.ndarray:
    """Coefficients of ``p(z) = sum c (z^a + z^b)`` on exponents ``-k..k``."""
    v = np.zeros(2 * k + 1)
    for t in g.terms:
        v[t.a + k] += float(t.coeff)
        v[t.b + k] += float(t.coeff)
    return v


def linearization_kernel_dim(k: int) -> int:
    """Dimension of the k-localized maps whose linearization at ``e`` vanishes."""
    maps = basis(k)
    m = np.array([_laurent_vector(g, k) for g in maps]).T
    return len(maps) - int(np.linalg.matrix_rank(m))


class GMapSyntaxError(ValueError):
    """Parse failure carrying the 0-based character ``position``."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


@dataclass(frozen=True)
class GMapExpr:
    source: str
    resolved: GMap


_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_]\w*)"
    r"|(?P<op>[-+*~]))"
)


def _tokenize(src: str):
    pos, out = 0, []
    while pos < len(src):
        if src[pos:].strip() == "":
            break
        m = _TOKEN.match(src, pos)
        if not m or m.end() == pos:
            start = pos + len(src[pos:]) - len(src[pos:].lstrip())
            raise GMapSyntaxError(f"unexpected character {src[start]!r}", start)
        kind = m.lastgroup
        start = m.start(kind)
        out.append((kind, m.group(kind), start))
        pos = m.end()
    out.append(("end", "", len(src)))
    return out


def _number(text: str):
    if re.fullmatch(r"\d+", text):
        return Fraction(int(text))
    try:
        return Fraction(text)
    except ValueError:
        return float(text)


def parse(expr: str) -> GMapExpr:
    """Parse e.g. ``"G3 - 2*~G3 + ~G1 - G2"`` into a canonical map."""
    toks = _tokenize(expr)
    if toks[0][0] == "end":
        raise GMapSyntaxError("empty expression", 0)
    i = 0
    total = GMap()

    def peek():
        return toks[i]

    sign = 1
    if peek() == ("op", "-", peek()[2]) or peek() == ("op", "+", peek()[2]):
        sign = -1 if peek()[1] == "-" else 1
        i += 1
    while True:
        coeff = Fraction(1)
        kind, text, pos = peek()
        if kind == "num":
            coeff = _number(text)
            i += 1
            kind, text, pos = peek()
            if (kind, text) != ("op", "*"):
                raise GMapSyntaxError("expected '*' after coefficient", pos)
            i += 1
            kind, text, pos = peek()
        elif kind == "op" and text == "*":
            raise GMapSyntaxError("malformed coefficient before '*'", pos)
        flip = False
        if (kind, text) == ("op", "~"):
            flip = True
            i += 1
            kind, text, pos = peek()
        if kind != "name":
            what = "end of input" if kind == "end" else repr(text)
            raise GMapSyntaxError(f"expected a map name G0..G8, found {what}", pos)
        if not re.fullmatch(r"G[0-8]", text):
            raise GMapSyntaxError(f"unknown name {text!r}", pos)
        g = named(text)
        if flip:
            g = tilde(g)
        total = total + (sign * coeff) * g
        i += 1
        kind, text, pos = peek()
        if kind == "end":
            break
        if kind != "op" or text not in "+-":
            raise GMapSyntaxError(f"expected '+' or '-', found {text!r}", pos)
        sign = 1 if text == "+" else -1
        i += 1
    name = expr.strip() if re.fullmatch(r"\s*~?G[0-8]\s*", expr) else ""
    return GMapExpr(expr, GMap(total.terms, name.replace(" ", "")))
