#!/usr/bin/env python3
"""Deterministic quadrature survey at the critical index.

Prints, along a width ladder:
  * the two log-asymptotic integral ratios and their limit constants,
  * the variance pieces under both covariance conventions,
  * the factorized disjoint-region factors and their assembled product,
  * the scaled first-chaos variance.

This is the fastest way to see which limit claims are desk-reachable: the
ac-factor converges polynomially, everything normalized by a power of
log(1/eps) crawls.
"""

import argparse

import numpy as np

from dsltlab import (
    HurstModel,
    MuConvention,
    PrefactorMode,
    ac_factor,
    b_factor,
    b_factor_truncated,
    first_chaos_variance,
    lemma23_i_ratio,
    lemma23_ii_ratio,
    scale_factor,
    sigma_squared,
    v3_factorized_limit,
    variance_pieces,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dim", type=int, default=3)
    ap.add_argument("--eps", type=str, default="1e-2,1e-4,1e-6,1e-8")
    args = ap.parse_args()

    model = HurstModel(H=1.0 / args.dim, d=args.dim)
    eps_list = [float(v) for v in args.eps.split(",")]
    s2 = sigma_squared(model)
    H = model.H

    print(f"d = {args.dim}, H = {H:.4f}, sigma2 = {s2:.6f}\n")
    print("log-asymptotic ratios (limits 1/H and 1/(2H)):")
    for eps in eps_list:
        print(f"  eps={eps:8.1e}  ratio_i={lemma23_i_ratio(eps, H, args.dim):7.4f} "
              f"(-> {1/H:.1f})   ratio_ii={lemma23_ii_ratio(eps, H, args.dim):7.4f} "
              f"(-> {1/(2*H):.2f})")

    print("\nfactorized disjoint-region factors (limits 3 and 9 at d = 3, t = 1):")
    for eps in eps_list:
        bf, af = b_factor(eps, model), ac_factor(eps, model)
        prod = v3_factorized_limit(model, eps)
        print(f"  eps={eps:8.1e}  b={bf:7.4f}  ac={af:7.4f}  product={prod:8.5f} "
              f"({100 * prod / s2:5.1f}% of sigma2)")
    print(f"  [truncated b-form at cutoff 1e-6: {b_factor_truncated(1e-6, model):.4f}; "
          f"at 1e-9: {b_factor_truncated(1e-9, model):.4f}]")

    print("\nvariance pieces, d-squared prefactor (scaled = x scale_factor^2):")
    for eps in eps_list:
        va = variance_pieces(eps, model, MuConvention.ABSOLUTE)
        vs = variance_pieces(eps, model, MuConvention.SIGNED)
        s = scale_factor(model, eps) ** 2
        print(f"  eps={eps:8.1e}  abs: V1={va.v1:9.3e} V2={va.v2:9.3e} V3={va.v3:9.3e} "
              f"scaled_total={va.total * s:9.3e} | signed total={vs.total:9.3e}")

    print("\nscaled first-chaos variance (quadrature):")
    for eps in eps_list:
        fc = first_chaos_variance(eps, model)
        print(f"  eps={eps:8.1e}  scaled={fc * scale_factor(model, eps) ** 2:10.4e} "
              f"(sigma2 = {s2:.4f})")


if __name__ == "__main__":
    main()
