"""Command-line front end: ``l96gen <subcommand> [options]``.

Exit status is 0 on success, 1 on a domain error (no Hopf point, Newton
failure, blow-up, ...) and 2 on a usage error (bad flags, unparsable G-map
expression, inconsistent sizes).  Numbers are written in shortest round-trip
form; JSON goes to stdout unless ``--out`` is given.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import bifurcation as bif
from . import dynamics as dyn
from . import equilibria as eq
from . import experiments as ex
from . import io
from . import spectral as sp
from . import svg
from .gmap import GMapSyntaxError, basis, energy_constraint_matrix, is_energy_preserving, parse
from .integrate import BlowUpError, StepSizeError

__all__ = ["main", "build_parser", "UsageError"]


class UsageError(ValueError):
    """Invalid input detected before any computation starts."""


# argument helpers

def _gmap(text: str):
    try:
        return parse(text).resolved
    except GMapSyntaxError as exc:
        raise UsageError(f"invalid G-map expression {text!r}: {exc}") from None


def _check_n(g, n: int, allow_aliasing: bool = False) -> None:
    try:
        g.check_size(n, allow_aliasing)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _system(args, inviscid: bool = False) -> dyn.SystemSpec:
    g = _gmap(args.gmap)
    _check_n(g, args.n, args.allow_aliasing)
    if inviscid or getattr(args, "inviscid", False):
        return dyn.SystemSpec.inviscid_system(args.n, g, args.allow_aliasing)
    if args.params is not None:
        try:
            a, b, c = io.load_site_params(args.params, args.n)
        except (OSError, ValueError) as exc:
            raise UsageError(str(exc)) from None
        return dyn.SystemSpec(args.n, g, a, b, c, allow_aliasing=args.allow_aliasing)
    return dyn.SystemSpec(args.n, g, 1.0, 1.0, args.F, allow_aliasing=args.allow_aliasing)


def _initial(args, spec: dyn.SystemSpec) -> np.ndarray:
    if args.x0 is not None:
        path = Path(args.x0)
        try:
            if path.suffix.lower() == ".json":
                x0 = np.asarray(io.read_json(path), dtype=float)
            else:
                x0 = io.read_trajectory(path).final
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read initial state: {exc}") from None
        if x0.shape != (spec.n,):
            raise UsageError(f"initial state has length {x0.size}, expected N = {spec.n}")
        return x0
    rng = np.random.default_rng([args.seed, 0])
    if spec.inviscid:
        return rng.standard_normal(spec.n)
    return dyn.random_initial(spec, rng)


def _add_gmap(p, default="G3"):
    p.add_argument("--gmap", default=default, help=f"G-map expression, e.g. 'G3 - ~G3' (default {default})")


def _add_system(p, n_default=36, F_default=8.0):
    _add_gmap(p)
    p.add_argument("--n", type=int, default=n_default, help=f"number of sites (default {n_default})")
    p.add_argument("--F", type=float, default=F_default, help=f"constant forcing (default {F_default})")
    p.add_argument("--params", help="per-site alpha,beta,gamma file (CSV with N rows or JSON); overrides --F")
    p.add_argument("--inviscid", action="store_true", help="advection only (no dissipation, no forcing)")
    p.add_argument("--allow-aliasing", action="store_true", help="admit N < 2k+2 (offsets wrap)")


def _add_start(p):
    p.add_argument("--x0", help="initial state: JSON list or trajectory CSV (last row used)")
    p.add_argument("--seed", type=int, default=0, help="seed for the random initial state (default 0)")


def _add_solver(p, rtol=1e-8, atol=1e-10):
    p.add_argument("--solver", choices=("adaptive", "rk4"), default="adaptive", help="integrator (default adaptive)")
    p.add_argument("--dt", type=float, default=0.05, help="RK4 step (default 0.05)")
    p.add_argument("--rtol", type=float, default=rtol, help=f"adaptive relative tolerance (default {rtol:g})")
    p.add_argument("--atol", type=float, default=atol, help=f"adaptive absolute tolerance (default {atol:g})")
    p.add_argument("--dt-out", type=float, default=0.01, help="output spacing (default 0.01)")


def _integrate(args, spec, x0, t0, t1) -> dyn.Trajectory:
    if t1 <= t0:
        raise UsageError("--t1 must exceed --t0")
    if args.solver == "rk4":
        if args.dt <= 0:
            raise UsageError("--dt must be positive")
        every = max(1, int(round(args.dt_out / args.dt))) if args.dt_out else 1
        return dyn.integrate_rk4(spec, x0, t0, t1, args.dt, every)
    if args.rtol <= 0 or args.atol <= 0 or (args.dt_out is not None and args.dt_out <= 0):
        raise UsageError("tolerances and --dt-out must be positive")
    return dyn.integrate_adaptive(spec, x0, t0, t1, args.rtol, args.atol, args.dt_out)


# subcommands

def cmd_basis(args):
    if args.k not in (1, 2, 3):
        raise UsageError("--k must be 1, 2 or 3")
    maps = basis(args.k)
    n = 2 * args.k + 3
    m = energy_constraint_matrix(args.k, n)
    nullity = m.shape[1] - int(np.linalg.matrix_rank(m))
    out = {
        "k": args.k,
        "dimension": len(maps),
        "constraint_nullity": nullity,
        "constraint_n": n,
        "maps": [
            {"name": g.label(), "formula": g.formula(), "energy_preserving": is_energy_preserving(g).ok,
             **g.to_json()}
            for g in maps
        ],
    }
    io.write_json(args.out, out)


def cmd_eigencurve(args):
    g = _gmap(args.gmap)
    _check_n(g, args.n)
    if args.samples < 2:
        raise UsageError("--samples must be >= 2")
    p = sp.laurent_of(g)
    curve = sp.eigen_curve(p, args.n, args.F, args.samples)
    io.write_eigencurve(args.out, args.points, curve)
    if args.svg:
        svg.eigencurve_svg(args.svg, curve, f"{args.gmap}, N = {args.n}, F = {args.F:g}")


def cmd_hopf(args):
    g = _gmap(args.gmap)
    _check_n(g, args.n)
    p = sp.laurent_of(g)
    rep = bif.first_hopf(p, args.n)
    if not rep.tie:
        rep = bif.first_lyapunov(g, args.n)
    out = rep.to_json()
    out["wave"] = bif.wave_diagnostics(p, args.n).to_json()
    try:
        out["second"] = bif.second_hopf(p, args.n).to_json()
    except bif.NoHopfError:
        out["second"] = None
    io.write_json(args.out, out)


def _sweep_row(g, n):
    p = sp.laurent_of(g)
    try:
        h1 = bif.first_hopf(p, n)
    except bif.NoHopfError:
        return None
    I1 = None if h1.tie else bif.first_lyapunov(g, n).I1
    try:
        hh = bif.hopf_hopf(g, n)
    except (bif.NoHopfError, bif.DegenerateError):
        return (n, h1.F1, h1.mode_k, None, None, None, None, I1)
    return (n, hh.F1, hh.mode_k, hh.F2, hh.mode_l, hh.alpha0, hh.F3_star, I1)


def cmd_hopf_hopf(args):
    g = _gmap(args.gmap)
    if args.sweep:
        lo, hi = args.sweep
        if lo > hi:
            raise UsageError("--sweep needs N0 <= N1")
        _check_n(g, lo)
        rows = [r for r in (_sweep_row(g, n) for n in range(lo, hi + 1)) if r is not None]
        io.write_csv(args.out, io.SWEEP_COLUMNS, rows)
        return
    _check_n(g, args.n)
    io.write_json(args.out, bif.hopf_hopf(g, args.n).to_json())


def cmd_simulate(args):
    spec = _system(args)
    x0 = _initial(args, spec)
    tr = _integrate(args, spec, x0, args.t0, args.t1)
    io.write_trajectory(args.out, tr)
    if args.meta:
        meta = {"spec": io.spec_to_json(spec), "solver": tr.solver_meta, "seed": args.seed}
        io.write_json(args.meta, meta)


def cmd_hovmoeller(args):
    t0, t1 = args.window
    if t1 <= t0:
        raise UsageError("--window needs T0 < T1")
    if args.traj:
        try:
            tr = io.read_trajectory(args.traj)
        except (OSError, ValueError) as exc:
            raise UsageError(str(exc)) from None
    else:
        spec = _system(args)
        tr = _integrate(args, spec, _initial(args, spec), 0.0, max(t1, args.t1))
    grid = ex.hovmoeller_grid(tr, (t0, t1), args.interpolation, args.upsample)
    io.write_hovmoeller(args.grid, grid)
    if args.svg:
        svg.hovmoeller_svg(args.svg, grid)
    win = tr.window(t0, t1)
    try:
        crest = ex.crest_speed(grid)[0]
    except ValueError:
        crest = None
    summary = {
        "window": [t0, t1],
        "spatial_period": ex.spatial_period(win.final),
        "temporal_period": ex.temporal_period(tr, window=min(50.0, t1 - tr.times[0])),
        "crest_speed": crest,
        "pattern_speed": ex.pattern_speed(tr, (t0, t1)),
    }
    io.write_json(args.out, summary)


def _stationary_problem(args) -> eq.StationaryProblem:
    g = _gmap(args.gmap)
    _check_n(g, args.n)
    if args.params is not None:
        try:
            a, b, c = io.load_site_params(args.params, args.n)
        except (OSError, ValueError) as exc:
            raise UsageError(str(exc)) from None
        return eq.StationaryProblem(args.n, g, b, c, a)
    F = eq.step_forcing(args.n, args.step) if args.step is not None else args.F
    return eq.StationaryProblem(args.n, g, 1.0, F)


def cmd_stationary(args):
    if args.steps < 1:
        raise UsageError("--steps must be >= 1")
    prob = _stationary_problem(args)
    path = eq.homotopy_solve(prob, args.steps, args.tol)
    if args.path:
        io.write_json(args.path, {**path.to_json(), "x": path.x})
    out = {"complete": path.complete, "failed_at": path.failed_at, "message": path.message,
           "accepted_steps": len(path.t) - 1, "max_residual": max(path.residuals),
           "bound_ok": all(path.bound_ok), "apriori_bound": eq.apriori_bound(prob)}
    if path.complete:
        x = path.solution
        if args.csv:
            io.write_stationary(args.csv, prob.F, x)
        st = eq.local_stability(prob, x)
        out.update({"argmax": int(np.argmax(x)), "argmin": int(np.argmin(x)), "max": float(x.max()),
                    "min": float(x.min()), "period3_ripple": eq.has_period3_ripple(x),
                    "spectral_abscissa": st.abscissa, "stable": st.stable})
    io.write_json(args.out, out)
    if not path.complete:
        return 1


def cmd_ensemble(args):
    spec = _system(args)
    if not spec.is_standard:
        raise UsageError("ensemble searches need a constant forcing (--F)")
    if args.runs < 1 or args.jobs < 1:
        raise UsageError("--runs and --jobs must be >= 1")
    if args.bracket is not None:
        if args.F_lo is None or args.F_lo >= args.F:
            raise UsageError("--bracket needs --F-lo below --F")
        br = ex.ns_bracket(spec, args.bracket, args.F_lo, args.F, args.tol_F,
                           t_follow=args.t_follow, seed=args.seed)
        io.write_json(args.out, {"m": args.bracket, "F3_tilde": br.estimate, "lo": br.lo, "hi": br.hi,
                                 "history": br.history})
        return
    summ = ex.ensemble_search(spec, runs=args.runs, t_end=args.t_end, seed=args.seed, jobs=args.jobs)
    io.write_json(args.out, summ.to_json())


def cmd_energy_audit(args):
    g = _gmap(args.gmap)
    _check_n(g, args.n)
    spec = dyn.SystemSpec.inviscid_system(args.n, g)
    x0 = dyn.sine_initial(args.n, args.E0)
    out = {"N": args.n, "E0": args.E0, "t1": args.t1}
    if args.solver in ("rk4", "both"):
        tr = dyn.integrate_rk4(spec, x0, 0.0, args.t1, args.dt)
        out["rk4"] = {"dt": args.dt, "loss_percent_per_time": dyn.energy_loss_rate(tr)}
    if args.solver in ("adaptive", "both"):
        tr = dyn.integrate_adaptive(spec, x0, 0.0, args.t1, args.rtol, args.atol)
        out["adaptive"] = {"rtol": args.rtol, "atol": args.atol, "steps": tr.solver_meta["steps"],
                           "loss_percent_per_time": dyn.energy_loss_rate(tr)}
    io.write_json(args.out, out)


def cmd_invariants(args):
    g = _gmap(args.gmap)
    _check_n(g, args.n, args.allow_aliasing)
    spec = dyn.SystemSpec.inviscid_system(args.n, g, args.allow_aliasing)
    x0 = _initial(args, spec)
    tr = dyn.integrate_adaptive(spec, x0, 0.0, args.t1, args.rtol, args.atol, args.dt_out)
    rep = dyn.audit(tr)
    io.write_json(args.out, {"drift": rep.drift, "initial": rep.initial, "inapplicable": rep.inapplicable,
                             "max_drift": rep.max_drift()})


def cmd_reduce(args):
    if args.n not in (4, 6):
        raise UsageError("--n must be 4 or 6")
    g = parse("G3 - ~G3").resolved
    spec = dyn.SystemSpec.inviscid_system(args.n, g, allow_aliasing=args.n == 4)
    x0 = _initial(args, spec)
    if args.t1 <= 0 or args.samples < 2:
        raise UsageError("--t1 must be positive and --samples >= 2")
    direct = dyn.integrate_adaptive(spec, x0, 0.0, args.t1, 1e-11, 1e-12, args.t1 / (args.samples - 1))
    times = direct.times
    if args.n == 4:
        red = dyn.reduce_n4(x0)
        if red.degenerate:
            xs = np.tile(x0, (times.size, 1))
        else:
            xs = red.reconstruct(times)
        out = {"rho0": red.rho0, "rho1": red.rho1, "alpha0": red.alpha0, "alpha1": red.alpha1,
               "degenerate": red.degenerate,
               "hamiltonian": float(red.hamiltonian(red.alpha0, red.alpha1))}
    else:
        red = dyn.reduce_n6(x0)
        xs = red.reconstruct(times)
        out = {"c": red.c, "y0": red.y0, "angular_speed": red.angular_speed}
    out["max_reconstruction_error"] = float(np.max(np.abs(direct.states - xs)))
    io.write_json(args.out, out)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="l96gen", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True, metavar="subcommand")

    p = sub.add_parser("basis", help="energy-preserving basis of k-localized G-maps")
    p.add_argument("--k", type=int, required=True, help="localization radius 1, 2 or 3")
    p.add_argument("--out", help="JSON output path (default stdout)")
    p.set_defaults(func=cmd_basis)

    p = sub.add_parser("eigencurve", help="eigenvalue curve and discrete spectrum of the linearization")
    _add_gmap(p)
    p.add_argument("--n", type=int, default=36, help="number of sites (default 36)")
    p.add_argument("--F", type=float, default=1.0, help="scale factor F (default 1)")
    p.add_argument("--samples", type=int, default=721, help="curve samples (default 721)")
    p.add_argument("--out", help="curve CSV s,re,im (default stdout)")
    p.add_argument("--points", help="discrete eigenvalue CSV j,re,im")
    p.add_argument("--svg", help="optional SVG plot")
    p.set_defaults(func=cmd_eigencurve)

    p = sub.add_parser("hopf", help="first Hopf point, Lyapunov coefficient and wave velocities")
    _add_gmap(p)
    p.add_argument("--n", type=int, required=True, help="number of sites")
    p.add_argument("--out", help="JSON output path (default stdout)")
    p.set_defaults(func=cmd_hopf)

    p = sub.add_parser("hopf-hopf", help="Hopf-Hopf normal form and torus estimate F3*")
    _add_gmap(p)
    p.add_argument("--n", type=int, default=36, help="number of sites (default 36)")
    p.add_argument("--sweep", type=int, nargs=2, metavar=("N0", "N1"), help="CSV sweep over N0..N1 instead")
    p.add_argument("--out", help="JSON (or sweep CSV) output path (default stdout)")
    p.set_defaults(func=cmd_hopf_hopf)

    p = sub.add_parser("simulate", help="integrate a system and write the trajectory CSV")
    _add_system(p)
    _add_start(p)
    _add_solver(p)
    p.add_argument("--t0", type=float, default=0.0, help="start time (default 0)")
    p.add_argument("--t1", type=float, default=10.0, help="end time (default 10)")
    p.add_argument("--out", help="trajectory CSV (default stdout)")
    p.add_argument("--meta", help="JSON with system spec and solver statistics")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("hovmoeller", help="site-time raster with period and speed diagnostics")
    _add_system(p)
    _add_start(p)
    _add_solver(p)
    p.add_argument("--traj", help="use this trajectory CSV instead of simulating")
    p.add_argument("--t1", type=float, default=510.0, help="simulation end time (default 510)")
    p.add_argument("--window", type=float, nargs=2, default=(500.0, 510.0), metavar=("T0", "T1"),
                   help="time window (default 500 510)")
    p.add_argument("--interpolation", choices=("cubic", "none"), default="cubic", help="across-site interpolation")
    p.add_argument("--upsample", type=int, default=8, help="interpolated points per site (default 8)")
    p.add_argument("--grid", help="raster CSV: t then one column per fractional site")
    p.add_argument("--svg", help="optional SVG raster")
    p.add_argument("--out", help="JSON diagnostics (default stdout)")
    p.set_defaults(func=cmd_hovmoeller)

    p = sub.add_parser("stationary", help="stationary solution by homotopy continuation in the forcing")
    _add_gmap(p)
    p.add_argument("--n", type=int, default=120, help="number of sites (default 120)")
    p.add_argument("--F", type=float, default=1.0, help="constant forcing (default 1)")
    p.add_argument("--step", type=float, help="step forcing: 1 on the first half, STEP on the second")
    p.add_argument("--params", help="per-site alpha,beta,gamma file; overrides --F/--step")
    p.add_argument("--steps", type=int, default=10, help="homotopy steps K (default 10)")
    p.add_argument("--tol", type=float, default=1e-12, help="Newton residual tolerance (default 1e-12)")
    p.add_argument("--csv", help="solution CSV i,F,x")
    p.add_argument("--path", help="continuation path JSON")
    p.add_argument("--out", help="JSON summary (default stdout)")
    p.set_defaults(func=cmd_stationary)

    p = sub.add_parser("ensemble", help="attractor classes from a seeded ensemble, or a torus bracket")
    _add_system(p, F_default=1.0)
    p.add_argument("--runs", type=int, default=100, help="ensemble size (default 100)")
    p.add_argument("--t-end", type=float, default=1000.0, help="integration horizon (default 1000)")
    p.add_argument("--seed", type=int, default=0, help="ensemble seed (default 0)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    p.add_argument("--bracket", type=int, metavar="M", help="follow class M from --F down to --F-lo and bisect")
    p.add_argument("--F-lo", type=float, help="lower end of the bracket search")
    p.add_argument("--tol-F", type=float, default=1e-3, help="bracket width (default 1e-3)")
    p.add_argument("--t-follow", type=float, default=1000.0, help="time per bracket probe (default 1000)")
    p.add_argument("--out", help="JSON output path (default stdout)")
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("energy-audit", help="energy loss of RK4 and the adaptive solver, inviscid system")
    _add_gmap(p)
    p.add_argument("--n", type=int, default=36, help="number of sites (default 36)")
    p.add_argument("--E0", type=float, default=400.0, help="initial energy (default 400)")
    p.add_argument("--t1", type=float, default=100.0, help="end time (default 100)")
    p.add_argument("--solver", choices=("rk4", "adaptive", "both"), default="both", help="solvers to run")
    p.add_argument("--dt", type=float, default=0.05, help="RK4 step (default 0.05)")
    p.add_argument("--rtol", type=float, default=1e-10, help="adaptive relative tolerance (default 1e-10)")
    p.add_argument("--atol", type=float, default=1e-12, help="adaptive absolute tolerance (default 1e-12)")
    p.add_argument("--out", help="JSON output path (default stdout)")
    p.set_defaults(func=cmd_energy_audit)

    p = sub.add_parser("invariants", help="drift of conserved quantities along an inviscid run")
    _add_gmap(p)
    p.add_argument("--n", type=int, default=6, help="number of sites (default 6)")
    p.add_argument("--allow-aliasing", action="store_true", help="admit N < 2k+2 (offsets wrap)")
    _add_start(p)
    p.add_argument("--t1", type=float, default=100.0, help="end time (default 100)")
    p.add_argument("--rtol", type=float, default=1e-10, help="relative tolerance (default 1e-10)")
    p.add_argument("--atol", type=float, default=1e-12, help="absolute tolerance (default 1e-12)")
    p.add_argument("--dt-out", type=float, default=0.1, help="audit sample spacing (default 0.1)")
    p.add_argument("--out", help="JSON output path (default stdout)")
    p.set_defaults(func=cmd_invariants)

    p = sub.add_parser("reduce", help="closed-form N=4 / N=6 solutions of the symmetric inviscid system")
    p.add_argument("--n", type=int, required=True, help="4 or 6")
    _add_start(p)
    p.add_argument("--t1", type=float, default=20.0, help="comparison horizon (default 20)")
    p.add_argument("--samples", type=int, default=201, help="comparison times (default 201)")
    p.add_argument("--out", help="JSON output path (default stdout)")
    p.set_defaults(func=cmd_reduce)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        rc = args.func(args)
    except UsageError as exc:
        print(f"l96gen {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError, RuntimeError, BlowUpError, StepSizeError, OSError) as exc:
        print(f"l96gen {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return int(rc or 0)


if __name__ == "__main__":
    sys.exit(main())
