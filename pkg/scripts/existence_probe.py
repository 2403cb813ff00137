#!/usr/bin/env python3
"""Variance growth probe around the L2-existence threshold H = 1/d.

Below the threshold the estimator's variance stabilizes as the width
shrinks; above it the variance grows along the ladder.  Empirical evidence
only, of course, not a proof.
"""

import argparse

from dsltlab import ExperimentConfig, HurstModel, run_existence_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dim", type=int, default=3)
    ap.add_argument("--hurst-list", type=str, default="0.20,0.25,0.30,0.3333,0.40,0.45")
    ap.add_argument("--paths", type=int, default=400)
    ap.add_argument("--grid-n", type=int, default=512)
    ap.add_argument("--seed", type=int, default=11)
    args = ap.parse_args()

    config = ExperimentConfig(
        model=HurstModel(H=1.0 / args.dim, d=args.dim),
        grid_n=args.grid_n,
        n_paths=args.paths,
        eps_ladder=(0.2, 0.05, 0.0125, 0.003125),
        master_seed=args.seed,
        attach_quadrature=False,
    )
    hs = [float(v) for v in args.hurst_list.split(",")]
    rows = run_existence_sweep(config, hs)
    print(f"{'H':>8} {'inside':>7} {'eps':>9} {'raw_var':>12} {'growing':>8}")
    for r in rows:
        print(f"{r['hurst']:8.4f} {str(r['exists_l2']):>7} {r['eps']:9.4g} "
              f"{r['raw_var']:12.5e} {str(r['growth_flag']):>8}")


if __name__ == "__main__":
    main()
