"""Batch Monte Carlo experiments: scaling ladders, existence sweeps, output files.

An experiment generates a seeded path ensemble once, evaluates the
derivative estimator and its first-chaos projection at every width of a
decreasing ladder (common random numbers across widths), and writes one
row per width.  Rows are persisted incrementally so partial runs resume.

Per-path work is deterministic given (master_seed, path_index) alone, and
rows are assembled in fixed order, so output bytes do not depend on the
worker count.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.stats

from . import __version__
from .estimator import ContractionMode, Scheme, dslt_ensemble, first_chaos_ensemble
from .fbm import HurstModel, TimeGrid, generate_ensemble
from .moments import PrefactorMode
from .quadrature import (
    MuConvention,
    critical_variance_d2,
    first_chaos_variance,
    scale_factor,
    sigma_squared,
    variance_pieces,
)

__all__ = [
    "ExperimentConfig",
    "LadderRow",
    "LadderResult",
    "NormalityStats",
    "run_clt_ladder",
    "run_existence_sweep",
    "normality_stats",
    "emit_results",
    "load_config_file",
    "resolve_threads",
    "CSV_COLUMNS",
    "THREADS_ENV_VAR",
]

THREADS_ENV_VAR = "DSLTLAB_THREADS"

DEFAULT_MC_LADDER = tuple(10.0 ** (-k / 2.0) for k in range(2, 7))       # 1e-1 .. 1e-3
DEFAULT_QUAD_LADDER = tuple(10.0 ** (-k) for k in range(2, 9))           # 1e-2 .. 1e-8

CSV_COLUMNS = (
    "eps", "n_paths", "grid_n", "raw_mean", "raw_var", "scale_factor",
    "scaled_var", "sigma2_target", "ks_stat", "ks_p", "skewness",
    "excess_kurtosis", "first_chaos_var", "quad_var_total",
)

_BLOCK_SIZE = 128


def resolve_threads(requested: int | None = None) -> int:
    """Worker count: explicit argument, then the environment, then the host."""
    if requested is not None:
        if requested < 1:
            raise ValueError(f"thread budget must be >= 1, got {requested}")
        return requested
    env = os.environ.get(THREADS_ENV_VAR)
    if env:
        value = int(env)
        if value < 1:
            raise ValueError(f"{THREADS_ENV_VAR} must be >= 1, got {env}")
        return value
    return os.cpu_count() or 1


@dataclass(frozen=True)
class ExperimentConfig:
    model: HurstModel
    grid_n: int = 1024
    n_paths: int = 2000
    eps_ladder: tuple[float, ...] = DEFAULT_MC_LADDER
    master_seed: int = 0
    scheme: Scheme = Scheme.MIDPOINT
    mu_convention: MuConvention = MuConvention.SIGNED
    prefactor: PrefactorMode = PrefactorMode.PER_COORDINATE
    contraction: ContractionMode = ContractionMode.SINGLE
    out_path: str | None = None
    fmt: str = "csv"
    threads: int | None = None
    attach_quadrature: bool = True

    def __post_init__(self):
        if self.n_paths < 2:
            raise ValueError(f"need at least 2 paths, got {self.n_paths}")
        if self.grid_n < 2:
            raise ValueError(f"need at least 2 grid intervals, got {self.grid_n}")
        ladder = tuple(float(e) for e in self.eps_ladder)
        if not ladder or any(e <= 0 for e in ladder):
            raise ValueError("eps ladder must be nonempty and positive")
        if any(b >= a for a, b in zip(ladder, ladder[1:])):
            raise ValueError("eps ladder must be strictly decreasing")
        object.__setattr__(self, "eps_ladder", ladder)
        if self.fmt not in ("csv", "json"):
            raise ValueError(f"format must be csv or json, got {self.fmt}")

    def to_dict(self) -> dict:
        return {
            "hurst": self.model.H,
            "dim": self.model.d,
            "t": self.model.t,
            "k": list(self.model.k),
            "grid_n": self.grid_n,
            "n_paths": self.n_paths,
            "eps_ladder": list(self.eps_ladder),
            "master_seed": self.master_seed,
            "scheme": self.scheme.value,
            "mu_convention": self.mu_convention.value,
            "prefactor": self.prefactor.value,
            "contraction": self.contraction.value,
            "path_reuse_across_eps": True,
        }


@dataclass(frozen=True)
class NormalityStats:
    ks_stat: float
    ks_p: float
    skewness: float
    excess_kurtosis: float
    ks_p_approximate: bool = True  # parameters are fitted from the sample


@dataclass(frozen=True)
class LadderRow:
    eps: float
    n_paths: int
    grid_n: int
    raw_mean: float
    raw_var: float
    scale_factor: float
    scaled_var: float
    sigma2_target: float
    ks_stat: float
    ks_p: float
    skewness: float
    excess_kurtosis: float
    first_chaos_var: float
    quad_var_total: float

    def as_tuple(self):
        return tuple(getattr(self, c) for c in CSV_COLUMNS)


@dataclass
class LadderResult:
    config: ExperimentConfig
    rows: list[LadderRow] = field(default_factory=list)


def _ks_against_fitted_normal(samples: np.ndarray):
    mean = float(np.mean(samples))
    std = float(np.std(samples, ddof=1))
    if std == 0.0:
        return 1.0, 0.0
    res = scipy.stats.kstest(samples, "norm", args=(mean, std))
    return float(res.statistic), float(res.pvalue)


def normality_stats(samples) -> NormalityStats:
    """KS statistic against a normal with fitted mean/std, plus moment stats.

    The p-value comes from the asymptotic KS distribution and is
    approximate because the parameters are estimated (the flag records
    this); with fitted parameters it errs conservative.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.size < 8:
        raise ValueError(f"need at least 8 samples, got {samples.size}")
    ks_stat, ks_p = _ks_against_fitted_normal(samples)
    return NormalityStats(
        ks_stat=ks_stat,
        ks_p=ks_p,
        skewness=float(scipy.stats.skew(samples)),
        excess_kurtosis=float(scipy.stats.kurtosis(samples)),
    )


def _sigma2_target(model: HurstModel) -> float:
    if model.d == 2 and abs(model.H - 0.5) < 1e-12:
        return critical_variance_d2(model.t)
    if model.is_critical() and model.d >= 3:
        return sigma_squared(model)
    return float("nan")


def _evaluate_block(args):
    (model, grid_n, seed, start, size, eps_list, scheme, contraction) = args
    grid = TimeGrid(n=grid_n, t=model.t)
    values = generate_ensemble(model, grid, seed, size, start=start)
    ds = dslt_ensemble(values, model, grid, eps_list, scheme=scheme)
    fc = first_chaos_ensemble(values, model, grid, eps_list, mode=contraction, scheme=scheme)
    return ds, fc


def _ensemble_statistics(config: ExperimentConfig):
    """dslt and first-chaos values for all paths and widths, (n_eps, n_paths)."""
    eps_list = list(config.eps_ladder)
    blocks = []
    for start in range(0, config.n_paths, _BLOCK_SIZE):
        size = min(_BLOCK_SIZE, config.n_paths - start)
        blocks.append((config.model, config.grid_n, config.master_seed, start,
                       size, eps_list, config.scheme, config.contraction))
    workers = resolve_threads(config.threads)
    if workers > 1 and len(blocks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_evaluate_block, blocks))
    else:
        results = [_evaluate_block(b) for b in blocks]
    ds = np.concatenate([r[0] for r in results], axis=1)
    fc = np.concatenate([r[1] for r in results], axis=1)
    return ds, fc


def _completed_eps(out_path: str) -> set[float]:
    path = Path(out_path)
    if not path.exists():
        return set()
    done = set()
    with path.open() as fh:
        header = fh.readline()
        if not header.startswith("eps,"):
            return set()
        for line in fh:
            if line.strip():
                done.add(float(line.split(",", 1)[0]))
    return done


def _format_cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _append_row(out_path: str, row: LadderRow):
    path = Path(out_path)
    new = not path.exists()
    with path.open("a") as fh:
        if new:
            fh.write(",".join(CSV_COLUMNS) + "\n")
        fh.write(",".join(_format_cell(v) for v in row.as_tuple()) + "\n")
        fh.flush()


def _make_row(config: ExperimentConfig, eps: float, ds: np.ndarray, fc: np.ndarray) -> LadderRow:
    model = config.model
    raw_mean = float(np.mean(ds))
    raw_var = float(np.var(ds, ddof=1))
    sf = scale_factor(model, eps) if eps < 1.0 else 1.0
    if ds.size >= 8:
        stats = normality_stats(ds)
        ks_stat, ks_p = stats.ks_stat, stats.ks_p
        skew, kurt = stats.skewness, stats.excess_kurtosis
    else:
        # degenerate sizes still emit rows; ks_p is meaningless here
        ks_stat, ks_p = _ks_against_fitted_normal(ds)
        skew = float(scipy.stats.skew(ds))
        kurt = float(scipy.stats.kurtosis(ds))
    if config.attach_quadrature:
        quad_total = variance_pieces(
            eps, model, mu_convention=config.mu_convention,
            prefactor=config.prefactor).total
    else:
        quad_total = float("nan")
    return LadderRow(
        eps=eps,
        n_paths=config.n_paths,
        grid_n=config.grid_n,
        raw_mean=raw_mean,
        raw_var=raw_var,
        scale_factor=sf,
        scaled_var=raw_var * sf * sf,
        sigma2_target=_sigma2_target(model),
        ks_stat=ks_stat,
        ks_p=ks_p,
        skewness=skew,
        excess_kurtosis=kurt,
        first_chaos_var=float(np.var(fc, ddof=1)),
        quad_var_total=quad_total,
    )


def run_clt_ladder(config: ExperimentConfig) -> LadderResult:
    """Scaling-ladder experiment for the critical limit theorems.

    One ensemble is generated and reused across the ladder.  When a CSV
    output path is configured, rows append incrementally and widths already
    in the file are skipped on re-runs.
    """
    incremental = config.out_path is not None and config.fmt == "csv"
    done = _completed_eps(config.out_path) if incremental else set()
    pending = [e for e in config.eps_ladder if e not in done]
    result = LadderResult(config=config)
    if not pending:
        return result
    sub = dataclasses.replace(config, eps_ladder=tuple(pending))
    ds_all, fc_all = _ensemble_statistics(sub)
    for i, eps in enumerate(pending):
        row = _make_row(config, eps, ds_all[i], fc_all[i])
        result.rows.append(row)
        if incremental:
            _append_row(config.out_path, row)
    return result


def run_existence_sweep(config: ExperimentConfig, hurst_values) -> list[dict]:
    """Empirical L2-boundedness probe across Hurst indices.

    For each H the raw variance is tracked along the width ladder; bounded
    behavior is the inside-regime signal, monotone growth the outside one.
    A probe, not a proof.
    """
    rows = []
    for H in hurst_values:
        model = HurstModel(H=float(H), d=config.model.d, t=config.model.t, k=config.model.k)
        sub = dataclasses.replace(config, model=model, out_path=None, attach_quadrature=False)
        ds_all, _ = _ensemble_statistics(sub)
        variances = [float(np.var(ds_all[i], ddof=1)) for i in range(len(sub.eps_ladder))]
        growing = all(b > a for a, b in zip(variances, variances[1:]))
        for eps, var in zip(sub.eps_ladder, variances):
            rows.append({
                "hurst": model.H,
                "exists_l2": model.exists_l2(),
                "eps": eps,
                "raw_var": var,
                "growth_flag": growing,
            })
    return rows


def emit_results(result: LadderResult, fmt: str | None = None, out_path: str | None = None):
    """Write the ladder to CSV or JSON plus a plot-data companion file.

    Returns the list of files written.  CSV uses shortest round-trip float
    formatting, so identical runs produce identical bytes.
    """
    fmt = fmt or result.config.fmt
    out_path = out_path or result.config.out_path
    if out_path is None:
        raise ValueError("no output path configured")
    out = Path(out_path)
    written = []
    if fmt == "csv":
        lines = [",".join(CSV_COLUMNS)]
        for row in result.rows:
            lines.append(",".join(_format_cell(v) for v in row.as_tuple()))
        out.write_text("\n".join(lines) + "\n")
        written.append(out)
    elif fmt == "json":
        payload = {
            "version": __version__,
            "config": result.config.to_dict(),
            "rows": [dict(zip(CSV_COLUMNS, row.as_tuple())) for row in result.rows],
        }
        out.write_text(json.dumps(payload, indent=2, allow_nan=True) + "\n")
        written.append(out)
    else:
        raise ValueError(f"unknown format {fmt}")
    plot = out.with_suffix(out.suffix + ".plot.csv")
    plot_lines = ["eps,scaled_var,sigma2_target"]
    for row in result.rows:
        plot_lines.append(f"{row.eps!r},{row.scaled_var!r},{row.sigma2_target!r}")
    plot.write_text("\n".join(plot_lines) + "\n")
    written.append(plot)
    return written


_CONFIG_KEYS = {
    "hurst": float,
    "dim": int,
    "t": float,
    "k": str,
    "grid_n": int,
    "n_paths": int,
    "eps": str,
    "seed": int,
    "scheme": str,
    "mu_convention": str,
    "prefactor": str,
    "contraction": str,
    "threads": int,
    "out": str,
    "format": str,
}


def load_config_file(path) -> ExperimentConfig:
    """Parse the flat key-value config format; unknown keys are errors."""
    raw = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValueError(f"{path}:{lineno}: expected key = value, got {line!r}")
        key, _, value = stripped.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _CONFIG_KEYS:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        raw[key] = _CONFIG_KEYS[key](value)
    if "hurst" not in raw or "dim" not in raw:
        raise ValueError(f"{path}: hurst and dim are required")
    k = tuple(int(v) for v in raw["k"].split(",")) if "k" in raw else None
    model = HurstModel(H=raw["hurst"], d=raw["dim"], t=raw.get("t", 1.0), k=k)
    kwargs = dict(model=model)
    if "grid_n" in raw:
        kwargs["grid_n"] = raw["grid_n"]
    if "n_paths" in raw:
        kwargs["n_paths"] = raw["n_paths"]
    if "eps" in raw:
        kwargs["eps_ladder"] = tuple(float(v) for v in raw["eps"].split(","))
    if "seed" in raw:
        kwargs["master_seed"] = raw["seed"]
    if "scheme" in raw:
        kwargs["scheme"] = Scheme(raw["scheme"])
    if "mu_convention" in raw:
        kwargs["mu_convention"] = MuConvention(raw["mu_convention"])
    if "prefactor" in raw:
        kwargs["prefactor"] = PrefactorMode(raw["prefactor"])
    if "contraction" in raw:
        kwargs["contraction"] = ContractionMode(raw["contraction"])
    if "threads" in raw:
        kwargs["threads"] = raw["threads"]
    if "out" in raw:
        kwargs["out_path"] = raw["out"]
    if "format" in raw:
        kwargs["fmt"] = raw["format"]
    return ExperimentConfig(**kwargs)
