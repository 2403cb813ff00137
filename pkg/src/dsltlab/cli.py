"""Command-line entry point.

Subcommands: gen (binary path files), estimate (single-path functionals),
clt (scaling-ladder experiment), existence (L2 regime sweep), quadcheck
(deterministic quadrature reports), chaos (coefficient tables).
"""

from __future__ import annotations

import argparse
import json
import sys
from itertools import product
from pathlib import Path

import numpy as np

from . import __version__
from .estimator import (
    EstimatorRequest,
    Scheme,
    dslt,
    first_chaos_ensemble,
    slt,
)
from .experiments import (
    ExperimentConfig,
    emit_results,
    load_config_file,
    resolve_threads,
    run_clt_ladder,
    run_existence_sweep,
)
from .fbm import HurstModel, TimeGrid, generate_path
from .moments import PrefactorMode, chaos_coefficient
from .pathfile import read_path, write_path
from .quadrature import (
    MuConvention,
    ac_factor,
    b_factor,
    critical_variance_d2,
    first_chaos_variance,
    lemma23_i_ratio,
    lemma23_ii_ratio,
    scale_factor,
    sigma_squared,
    v3_factorized_limit,
    variance_pieces,
)


def _eps_list(text: str) -> list[float]:
    values = [float(v) for v in text.split(",") if v.strip()]
    if not values:
        raise argparse.ArgumentTypeError("empty eps list")
    return values


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--hurst", type=float, help="Hurst index in (0, 1)")
    parser.add_argument("--dim", type=int, help="spatial dimension")
    parser.add_argument("--t", type=float, default=1.0, help="time horizon")
    parser.add_argument("--grid-n", type=int, default=1024, help="grid intervals")
    parser.add_argument("--paths", type=int, default=2000, help="Monte Carlo paths")
    parser.add_argument("--eps", type=_eps_list, help="comma list of widths, decreasing")
    parser.add_argument("--seed", type=int, default=0, help="master seed")
    parser.add_argument("--scheme", choices=[s.value for s in Scheme],
                        default=Scheme.MIDPOINT.value)
    parser.add_argument("--mu-convention", choices=[m.value for m in MuConvention],
                        default=MuConvention.SIGNED.value)
    parser.add_argument("--prefactor", choices=[p.value for p in PrefactorMode],
                        default=PrefactorMode.PER_COORDINATE.value)
    parser.add_argument("--threads", type=int, default=None,
                        help="worker budget (default: DSLTLAB_THREADS or all cores)")
    parser.add_argument("--out", type=str, default=None, help="output file")
    parser.add_argument("--format", choices=["csv", "json"], default="csv")


def _model_from_args(args, k=None) -> HurstModel:
    if args.hurst is None or args.dim is None:
        raise SystemExit("--hurst and --dim are required")
    return HurstModel(H=args.hurst, d=args.dim, t=args.t, k=k)


def _cmd_gen(args) -> int:
    model = _model_from_args(args)
    grid = TimeGrid(n=args.grid_n, t=args.t)
    out = Path(args.out or "path.fbmp")
    n = args.paths if args.paths else 1
    for i in range(n):
        path = generate_path(model, grid, args.seed, path_index=i)
        target = out if n == 1 else out.with_name(f"{out.stem}-{i:04d}{out.suffix}")
        write_path(path, target)
        print(f"wrote {target} (H={model.H}, d={model.d}, n={grid.n}, method={path.method.value})")
    return 0


def _cmd_estimate(args) -> int:
    if args.path_file:
        path = read_path(args.path_file)
    else:
        model = _model_from_args(args)
        grid = TimeGrid(n=args.grid_n, t=args.t)
        path = generate_path(model, grid, args.seed)
    scheme = Scheme(args.scheme)
    k = tuple(int(v) for v in args.k.split(",")) if args.k else None
    y = tuple(float(v) for v in args.y.split(",")) if args.y else None
    eps_list = args.eps or [0.1]
    rows = []
    for eps in eps_list:
        req = EstimatorRequest(path=path, eps=eps, y=y, k=k, scheme=scheme)
        d_val = dslt(req)
        s_val = slt(path, eps, y=y, scheme=scheme)
        row = {"eps": eps, "dslt": d_val.value, "slt": s_val.value,
               "n_pairs": d_val.n_pairs}
        model = path.model
        k_eff = k if k is not None else model.k
        if sum(k_eff) == 1:
            chaos_model = HurstModel(H=model.H, d=model.d, t=model.t, k=k_eff)
            fc = first_chaos_ensemble(path.values[None, :, :], chaos_model,
                                      path.grid, [eps], scheme=scheme)
            row["first_chaos"] = float(fc[0, 0])
        rows.append(row)
        print("  ".join(f"{key}={value!r}" for key, value in row.items()))
    _write_rows(rows, args)
    return 0


def _config_from_args(args, k=None) -> ExperimentConfig:
    if args.config:
        return load_config_file(args.config)
    model = _model_from_args(args, k=k)
    kwargs = dict(
        model=model,
        grid_n=args.grid_n,
        n_paths=args.paths,
        master_seed=args.seed,
        scheme=Scheme(args.scheme),
        mu_convention=MuConvention(args.mu_convention),
        prefactor=PrefactorMode(args.prefactor),
        threads=args.threads,
        out_path=args.out,
        fmt=args.format,
    )
    if args.eps:
        kwargs["eps_ladder"] = tuple(args.eps)
    if hasattr(args, "no_quad") and args.no_quad:
        kwargs["attach_quadrature"] = False
    return ExperimentConfig(**kwargs)


def _cmd_clt(args) -> int:
    config = _config_from_args(args)
    result = run_clt_ladder(config)
    for row in result.rows:
        print(f"eps={row.eps:g}: raw_var={row.raw_var:.6e} scaled_var={row.scaled_var:.6e} "
              f"target={row.sigma2_target:.6e} ks_p={row.ks_p:.3f} "
              f"fc_var={row.first_chaos_var:.6e} quad={row.quad_var_total:.6e}")
    if config.out_path and config.fmt == "json":
        emit_results(result)
    return 0


def _cmd_existence(args) -> int:
    config = _config_from_args(args)
    hurst_values = [float(v) for v in args.hurst_list.split(",")]
    rows = run_existence_sweep(config, hurst_values)
    for row in rows:
        print(f"H={row['hurst']:.3f} exists_l2={row['exists_l2']} eps={row['eps']:g} "
              f"raw_var={row['raw_var']:.6e} growing={row['growth_flag']}")
    _write_rows(rows, args)
    return 0


def _cmd_quadcheck(args) -> int:
    model = _model_from_args(args)
    eps_list = args.eps or [1e-2, 1e-4, 1e-6, 1e-8]
    mu_conv = MuConvention(args.mu_convention)
    pref = PrefactorMode(args.prefactor)
    rows = []
    report = args.report
    if report in ("sigma2", "all"):
        if model.is_critical() and model.d >= 3:
            print(f"sigma2 = {sigma_squared(model)!r}")
        if model.d == 2 and abs(model.H - 0.5) < 1e-12:
            print(f"planar critical variance = {critical_variance_d2(model.t)!r}")
    for eps in eps_list:
        row = {"eps": eps}
        if report in ("lemma23", "all") and model.is_critical():
            row["log_ratio_i"] = lemma23_i_ratio(eps, model.H, model.d)
            row["log_ratio_ii"] = lemma23_ii_ratio(eps, model.H, model.d)
        if report in ("factors", "all") and model.is_critical() and model.H < 0.5:
            row["b_factor"] = b_factor(eps, model)
            row["ac_factor"] = ac_factor(eps, model)
            row["v3_factorized"] = v3_factorized_limit(model, eps)
        if report in ("pieces", "all"):
            vb = variance_pieces(eps, model, mu_convention=mu_conv, prefactor=pref)
            row.update(v1=vb.v1, v2=vb.v2, v3=vb.v3, total=vb.total, scaled=vb.scaled)
        if report in ("first-chaos", "all"):
            fc = first_chaos_variance(eps, model, mu_convention=mu_conv, prefactor=pref)
            row["first_chaos_var"] = fc
            if eps < 1.0:
                row["first_chaos_var_scaled"] = fc * scale_factor(model, eps) ** 2
        rows.append(row)
        print("  ".join(f"{key}={value:.6e}" if isinstance(value, float) else f"{key}={value}"
                        for key, value in row.items()))
    _write_rows(rows, args)
    return 0


def _cmd_chaos(args) -> int:
    d = args.dim or 3
    qmax = args.qmax
    rows = []
    for total in range(1, qmax + 1):
        for combo in product(range(total + 1), repeat=d):
            if sum(combo) != total:
                continue
            beta = chaos_coefficient(combo, d)
            rows.append({"q_multi": "+".join(map(str, combo)), "q": total, "beta": beta})
    for row in rows:
        print(f"q=({row['q_multi']}) total={row['q']} beta={row['beta']!r}")
    _write_rows(rows, args)
    return 0


def _write_rows(rows, args):
    if not getattr(args, "out", None) or not rows:
        return
    out = Path(args.out)
    if args.format == "json":
        out.write_text(json.dumps({"version": __version__, "rows": rows},
                                  indent=2, allow_nan=True) + "\n")
    else:
        cols = list(rows[0].keys())
        lines = [",".join(cols)]
        for row in rows:
            lines.append(",".join(repr(row[c]) if isinstance(row[c], float) else str(row[c])
                                  for c in cols))
        out.write_text("\n".join(lines) + "\n")
    print(f"wrote {out}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dsltlab",
        description="Self-intersection local time derivative laboratory for fBm",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate binary path files")
    _add_common(p)
    p.set_defaults(fn=_cmd_gen)

    p = sub.add_parser("estimate", help="single-path DSLT / SLT values")
    _add_common(p)
    p.add_argument("--path-file", type=str, default=None, help="read a stored path")
    p.add_argument("--k", type=str, default=None, help="derivative multi-index, comma ints")
    p.add_argument("--y", type=str, default=None, help="offset point, comma floats")
    p.set_defaults(fn=_cmd_estimate)

    p = sub.add_parser("clt", help="run the scaling-ladder experiment")
    _add_common(p)
    p.add_argument("--config", type=str, default=None, help="key=value config file")
    p.add_argument("--no-quad", dest="no_quad", action="store_true",
                   help="skip quadrature targets")
    p.set_defaults(fn=_cmd_clt)

    p = sub.add_parser("existence", help="variance growth sweep across Hurst indices")
    _add_common(p)
    p.add_argument("--config", type=str, default=None)
    p.add_argument("--hurst-list", type=str, required=True,
                   help="comma list of Hurst indices to probe")
    p.set_defaults(fn=_cmd_existence, no_quad=True)

    p = sub.add_parser("quadcheck", help="deterministic quadrature reports")
    _add_common(p)
    p.add_argument("--report", choices=["lemma23", "sigma2", "factors", "pieces",
                                        "first-chaos", "all"], default="all")
    p.set_defaults(fn=_cmd_quadcheck)

    p = sub.add_parser("chaos", help="chaos coefficient tables")
    _add_common(p)
    p.add_argument("--qmax", type=int, default=4, help="largest total order")
    p.set_defaults(fn=_cmd_chaos)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
