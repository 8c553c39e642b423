"""CSV and JSON readers/writers for the package's data products.

Floats are written with ``repr`` (shortest decimal that round-trips), so every
file read back through the matching loader reproduces the numbers bit for bit.
"""

from __future__ import annotations

import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from .dynamics import SystemSpec, Trajectory
from .gmap import GMap, GMapSyntaxError, parse

__all__ = [
    "fmt",
    "write_csv",
    "read_csv",
    "write_json",
    "read_json",
    "write_trajectory",
    "read_trajectory",
    "spec_to_json",
    "spec_from_json",
    "load_site_params",
    "write_eigencurve",
    "read_eigencurve",
    "write_stationary",
    "read_stationary",
    "write_hovmoeller",
    "read_hovmoeller",
    "SWEEP_COLUMNS",
    "HOPF_HOPF_COLUMNS",
]

SWEEP_COLUMNS = ("N", "F1", "k", "F2", "l", "alpha0", "F3_star", "I1")
HOPF_HOPF_COLUMNS = ("N", "F1", "m1", "F2", "m2", "F3_star", "F3_tilde")


def fmt(v) -> str:
    """Shortest round-trip text for numbers; empty string for ``None``."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return repr(float(v))


def write_csv(path, header, rows) -> None:
    """Write a CSV with header; ``path`` of ``None`` or ``"-"`` means stdout."""
    if path is None or str(path) == "-":
        _write_rows(sys.stdout, header, rows)
        return
    with open(path, "w", newline="") as fh:
        _write_rows(fh, header, rows)


def _write_rows(fh, header, rows) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty CSV (header row is mandatory)")
    return [h.strip() for h in rows[0]], [r for r in rows[1:] if r]


def _floats(rows, cols=None) -> np.ndarray:
    out = [[float(v) if v != "" else math.nan for v in r] for r in rows]
    arr = np.array(out, dtype=float)
    return arr if cols is None else arr[:, cols]


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def write_json(path, data) -> None:
    text = json.dumps(_clean(data), indent=2)
    if path is None or str(path) == "-":
        print(text)
    else:
        Path(path).write_text(text + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())


# trajectories

def write_trajectory(path, traj: Trajectory) -> None:
    header = ["t"] + [f"x{i}" for i in range(traj.n)]
    write_csv(path, header, (np.concatenate([[t], x]) for t, x in zip(traj.times, traj.states)))


def read_trajectory(path) -> Trajectory:
    header, rows = read_csv(path)
    if not header or header[0] != "t" or header[1:] != [f"x{i}" for i in range(len(header) - 1)]:
        raise ValueError(f"{path}: expected header t,x0,...,x(N-1)")
    arr = _floats(rows)
    return Trajectory(arr[:, 0], arr[:, 1:])


# system specs and per-site parameters

def _advection_text(g: GMap):
    if g.name:
        try:
            if parse(g.name).resolved == g:
                return g.name
        except GMapSyntaxError:
            pass
    return g.to_json()


def _advection_from(obj) -> GMap:
    if isinstance(obj, str):
        return parse(obj).resolved
    if isinstance(obj, dict):
        return GMap.from_json(obj)
    raise ValueError("advection must be an expression string or a terms object")


def _site_field(v):
    v = np.asarray(v, dtype=float)
    return float(v[0]) if v.size and np.all(v == v[0]) else v.tolist()


def spec_to_json(spec: SystemSpec) -> dict:
    if callable(spec.gamma):
        raise ValueError("time-dependent forcing cannot be serialized")
    return {
        "n": spec.n,
        "advection": _advection_text(spec.advection),
        "alpha": _site_field(spec.alpha),
        "beta": _site_field(spec.beta),
        "gamma": _site_field(spec.gamma),
        "inviscid": spec.inviscid,
        "allow_aliasing": spec.allow_aliasing,
    }


def spec_from_json(data: dict) -> SystemSpec:
    try:
        n = int(data["n"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"system spec needs an integer 'n': {exc}") from exc
    return SystemSpec(
        n,
        _advection_from(data.get("advection", "G3")),
        data.get("alpha", 1.0),
        data.get("beta", 1.0),
        data.get("gamma", 0.0),
        inviscid=bool(data.get("inviscid", False)),
        allow_aliasing=bool(data.get("allow_aliasing", False)),
    )


def load_site_params(path, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-site ``(alpha, beta, gamma)`` from CSV (``n`` rows) or JSON (scalars or lists).

    Raises ``ValueError`` on a wrong row count or non-positive ``beta``.
    """
    path = Path(path)
    if path.suffix.lower() == ".json":
        data = read_json(path)
        if not isinstance(data, dict):
            raise ValueError(f"{path}: expected a JSON object")
        cols = []
        for key, default in (("alpha", 1.0), ("beta", 1.0), ("gamma", 0.0)):
            v = np.asarray(data.get(key, default), dtype=float)
            if v.ndim == 0:
                v = np.full(n, float(v))
            if v.shape != (n,):
                raise ValueError(f"{path}: '{key}' has {v.size} entries, expected {n}")
            cols.append(v)
        alpha, beta, gamma = cols
    else:
        header, rows = read_csv(path)
        want = ["alpha", "beta", "gamma"]
        if header != want:
            raise ValueError(f"{path}: header must be alpha,beta,gamma, got {','.join(header)}")
        if len(rows) != n:
            raise ValueError(f"{path}: {len(rows)} rows for N = {n}")
        arr = _floats(rows)
        alpha, beta, gamma = arr[:, 0], arr[:, 1], arr[:, 2]
    if not (np.all(np.isfinite(alpha)) and np.all(np.isfinite(beta)) and np.all(np.isfinite(gamma))):
        raise ValueError(f"{path}: non-finite parameter")
    if np.any(beta <= 0):
        raise ValueError(f"{path}: beta must be positive at every site")
    return alpha, beta, gamma


# spectral and stationary products

def write_eigencurve(curve_path, points_path, curve) -> None:
    write_csv(curve_path, ("s", "re", "im"), zip(curve.s, curve.values.real, curve.values.imag))
    if points_path is not None:
        write_csv(points_path, ("j", "re", "im"), zip(curve.j, curve.points.real, curve.points.imag))


def read_eigencurve(curve_path) -> tuple[np.ndarray, np.ndarray]:
    header, rows = read_csv(curve_path)
    if header not in (["s", "re", "im"], ["j", "re", "im"]):
        raise ValueError(f"{curve_path}: unexpected header {header}")
    arr = _floats(rows)
    return arr[:, 0], arr[:, 1] + 1j * arr[:, 2]


def write_stationary(path, F, x) -> None:
    write_csv(path, ("i", "F", "x"), ((i, f, v) for i, (f, v) in enumerate(zip(F, x))))


def read_stationary(path) -> tuple[np.ndarray, np.ndarray]:
    header, rows = read_csv(path)
    if header != ["i", "F", "x"]:
        raise ValueError(f"{path}: expected header i,F,x")
    arr = _floats(rows)
    return arr[:, 1], arr[:, 2]


# Hovmoeller rasters: first column time, one column per fractional site

def write_hovmoeller(path, grid) -> None:
    header = ["t"] + [repr(float(s)) for s in grid.sites]
    write_csv(path, header, (np.concatenate([[t], row]) for t, row in zip(grid.times, grid.values)))


def read_hovmoeller(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    header, rows = read_csv(path)
    if not header or header[0] != "t":
        raise ValueError(f"{path}: expected leading 't' column")
    arr = _floats(rows)
    return arr[:, 0], np.array([float(h) for h in header[1:]]), arr[:, 1:]
