"""Energy loss of RK4 (dt = 0.05) and the adaptive solver on the inviscid 36-site system."""

import argparse
from pathlib import Path

from l96gen.dynamics import SystemSpec, energy_loss_rate, integrate_adaptive, integrate_rk4, sine_initial
from l96gen.io import write_json


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--E0", type=float, default=400.0)
    ap.add_argument("--horizons", type=float, nargs="+", default=(100.0, 1000.0))
    ap.add_argument("--outdir", default="results")
    args = ap.parse_args()
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)

    spec = SystemSpec.inviscid_system(36)
    x0 = sine_initial(36, args.E0)
    rows = []
    for t1 in args.horizons:
        rk = energy_loss_rate(integrate_rk4(spec, x0, 0.0, t1, 0.05))
        ad = energy_loss_rate(integrate_adaptive(spec, x0, 0.0, t1, 1e-10, 1e-12))
        rows.append({"t1": t1, "rk4_percent_per_time": rk, "adaptive_percent_per_time": ad})
        print(f"[0, {t1:g}]  RK4 {rk:.4f} %/time   adaptive {ad:.2e} %/time")
    write_json(out / "energy_loss.json", rows)


if __name__ == "__main__":
    main()
