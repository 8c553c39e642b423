"""Hopf, Hopf-Hopf and torus-onset values for the L96 ring at several sizes.

The analytic columns take well under a second.  ``--empirical`` adds the
ensemble classes at F = 1 (F = 1.5 for N = 12) and bisects the loss of the
second cycle, which takes minutes per size.
"""

import argparse
from pathlib import Path

from l96gen.bifurcation import hopf_hopf
from l96gen.dynamics import SystemSpec
from l96gen.experiments import NoBracketError, ensemble_search, ns_bracket
from l96gen.gmap import G3
from l96gen.io import HOPF_HOPF_COLUMNS, write_csv, write_json

SIZES = (12, 14, 18, 22, 28, 36)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=SIZES)
    ap.add_argument("--empirical", action="store_true", help="run ensembles and torus brackets")
    ap.add_argument("--runs", type=int, default=100)
    ap.add_argument("--jobs", type=int, default=4)
    ap.add_argument("--outdir", default="results")
    args = ap.parse_args()
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)

    rows, classes = [], {}
    for n in args.sizes:
        h = hopf_hopf(G3, n)
        F3_tilde = None
        if args.empirical:
            F = 1.5 if n == 12 else 1.0
            summ = ensemble_search(SystemSpec.standard(n, F), runs=args.runs, t_end=1000, jobs=args.jobs)
            classes[n] = {c.spatial_period: c.member_count for c in summ.classes}
            if h.alpha0 > 0:
                try:
                    br = ns_bracket(SystemSpec.standard(n, h.F2), h.m2, h.F1, max(h.F2, h.F3_star) + 0.05, 1e-3)
                    F3_tilde = br.estimate
                except NoBracketError as exc:
                    print(f"N={n}: {exc}")
        rows.append((n, h.F1, h.m1, h.F2, h.m2, h.F3_star, F3_tilde))
        print(f"N={n:3d}  F1={h.F1:.4f} m1={h.m1:3d}  F2={h.F2:.4f} m2={h.m2:3d}  F3*={h.F3_star:.4f}"
              + (f"  F3~={F3_tilde:.4f}" if F3_tilde is not None else "")
              + (f"  classes={classes[n]}" if n in classes else ""))
    write_csv(out / "hopf_hopf_table.csv", HOPF_HOPF_COLUMNS, rows)
    if classes:
        write_json(out / "hopf_hopf_classes.json", classes)


if __name__ == "__main__":
    main()
