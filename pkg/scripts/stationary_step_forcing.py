"""Stationary states of the 120-site ring under step forcing (1 on the left half, M on the right)."""

import argparse
from pathlib import Path

import numpy as np

from l96gen.equilibria import (
    StationaryProblem, has_period3_ripple, homotopy_solve, local_stability, step_forcing,
)
from l96gen.io import write_json, write_stationary


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--M", type=float, nargs="+", default=(2.0, 4.0, 8.0, 24.0))
    ap.add_argument("--outdir", default="results")
    args = ap.parse_args()
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)

    summary = []
    for M in args.M:
        prob = StationaryProblem(120, F=step_forcing(120, M))
        steps = 10 if M <= 8 else 1000
        path = homotopy_solve(prob, steps)
        row = {"M": M, "steps": steps, "complete": path.complete, "max_residual": max(path.residuals),
               "bound_ok": all(path.bound_ok)}
        if path.complete:
            x = path.solution
            write_stationary(out / f"stationary_M{M:g}.csv", prob.F, x)
            row.update({"argmax": int(np.argmax(x)), "max": float(x.max()), "argmin": int(np.argmin(x)),
                        "period3_ripple": has_period3_ripple(x),
                        "stable": local_stability(prob, x).stable})
        summary.append(row)
        print(row)
    write_json(out / "stationary_summary.json", summary)


if __name__ == "__main__":
    main()
