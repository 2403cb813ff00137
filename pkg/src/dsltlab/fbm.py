"""Fractional Brownian motion: parameters, grids, covariance, exact synthesis.

A d-dimensional fBm has independent components, each a centered Gaussian
process with covariance 0.5*(s^{2H} + u^{2H} - |s-u|^{2H}).  Paths are
sampled exactly (in distribution) on uniform grids by circulant embedding
of the increment autocovariance, with a Cholesky fallback when the
embedding is not numerically nonnegative definite.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "HurstModel",
    "TimeGrid",
    "FbmPath",
    "GenerationMethod",
    "fbm_covariance",
    "fgn_autocovariance",
    "generate_path",
    "generate_ensemble",
]

# Relative tolerance used by HurstModel.is_critical.
_CRITICAL_RTOL = 1e-12

# Embedding eigenvalues above -NEG_EIG_RTOL * max_eig are treated as rounding
# noise and clipped; anything below triggers the Cholesky fallback.
_NEG_EIG_RTOL = 1e-10


class GenerationMethod(enum.Enum):
    CIRCULANT_EMBEDDING = "circulant-embedding"
    CHOLESKY = "cholesky"


@dataclass(frozen=True)
class HurstModel:
    """Parameter bundle: Hurst index, dimension, horizon, derivative multi-index.

    k is the spatial derivative multi-index of the estimator kernel; it
    defaults to the first-coordinate partial (1, 0, ..., 0).
    """

    H: float
    d: int
    t: float = 1.0
    k: tuple[int, ...] = None  # type: ignore[assignment]

    def __post_init__(self):
        if not 0.0 < self.H < 1.0:
            raise ValueError(f"Hurst index must be in (0, 1), got {self.H}")
        if self.d < 1:
            raise ValueError(f"dimension must be >= 1, got {self.d}")
        if self.t <= 0.0:
            raise ValueError(f"horizon must be positive, got {self.t}")
        if self.k is None:
            object.__setattr__(self, "k", (1,) + (0,) * (self.d - 1))
        else:
            object.__setattr__(self, "k", tuple(int(v) for v in self.k))
        if len(self.k) != self.d:
            raise ValueError(f"multi-index length {len(self.k)} != dimension {self.d}")
        if any(v < 0 for v in self.k):
            raise ValueError(f"multi-index entries must be nonnegative, got {self.k}")

    @property
    def k_order(self) -> int:
        """Total derivative order |k|."""
        return sum(self.k)

    @property
    def n_odd(self) -> int:
        """Number of odd entries in the multi-index."""
        return sum(1 for v in self.k if v % 2 == 1)

    def is_critical(self) -> bool:
        """True iff H*d == 1 within relative tolerance 1e-12."""
        return abs(self.H * self.d - 1.0) <= _CRITICAL_RTOL

    def exists_l2(self) -> bool:
        """L2-existence condition H < min{2/(2|k|+d), 1/(|k|+d-#odd), 1/d}."""
        kk = self.k_order
        bound = min(2.0 / (2 * kk + self.d), 1.0 / (kk + self.d - self.n_odd), 1.0 / self.d)
        return self.H < bound


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid with n intervals on [0, t]."""

    n: int
    t: float

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"need at least 2 intervals, got {self.n}")
        if self.t <= 0.0:
            raise ValueError(f"horizon must be positive, got {self.t}")

    @property
    def step(self) -> float:
        return self.t / self.n

    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.t, self.n + 1)


@dataclass(eq=False)
class FbmPath:
    """One d-dimensional sample path on a uniform grid.

    values has shape (d, n+1), component-major, values[:, 0] == 0.
    The array is frozen after construction; paths are safe to share.
    """

    model: HurstModel
    grid: TimeGrid
    values: np.ndarray
    seed: int
    method: GenerationMethod

    def __post_init__(self):
        expected = (self.model.d, self.grid.n + 1)
        if self.values.shape != expected:
            raise ValueError(f"values shape {self.values.shape} != {expected}")
        self.values.flags.writeable = False


def fbm_covariance(s: float, u: float, H: float) -> float:
    """Covariance 0.5*(s^{2H} + u^{2H} - |s-u|^{2H}) of one fBm component.

    Accepts scalars or arrays (broadcasting); symmetric in (s, u).
    """
    s_arr, u_arr = np.asarray(s, dtype=float), np.asarray(u, dtype=float)
    if np.any(s_arr < 0) or np.any(u_arr < 0):
        raise ValueError("times must be nonnegative")
    if not 0.0 < H < 1.0:
        raise ValueError(f"Hurst index must be in (0, 1), got {H}")
    out = 0.5 * (s_arr ** (2 * H) + u_arr ** (2 * H) - np.abs(s_arr - u_arr) ** (2 * H))
    if out.ndim == 0:
        return float(out)
    return out


def fgn_autocovariance(lags, H: float, step: float) -> np.ndarray:
    """Autocovariance gamma(j) of fractional Gaussian noise increments.

    gamma(j) = 0.5*(|j+1|^{2H} + |j-1|^{2H} - 2|j|^{2H}) * step^{2H}
    """
    j = np.asarray(lags, dtype=float)
    g = 0.5 * (np.abs(j + 1) ** (2 * H) + np.abs(j - 1) ** (2 * H) - 2 * np.abs(j) ** (2 * H))
    return g * step ** (2 * H)


def _component_rng(seed: int, path_index: int, component: int) -> np.random.Generator:
    # Counter-based streams: a path depends only on (seed, path_index), each
    # component on its own jumped stream, independent of evaluation schedule.
    bitgen = np.random.Philox(key=[seed & 0xFFFFFFFFFFFFFFFF, path_index])
    if component:
        bitgen = bitgen.jumped(component)
    return np.random.Generator(bitgen)


def _embedding_eigenvalues(H: float, n: int, step: float) -> np.ndarray:
    gamma = fgn_autocovariance(np.arange(n), H, step)
    ring = np.concatenate([gamma, [0.0], gamma[1:][::-1]])
    return np.fft.fft(ring).real


def _fgn_circulant(eigs: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    """Exact fGn draw of length n from precomputed embedding eigenvalues."""
    z = np.empty(2 * n, dtype=complex)
    normals = rng.standard_normal(2 * n)
    z[0] = normals[0]
    z[n] = normals[1]
    half = (normals[2 : n + 1] + 1j * normals[n + 1 :]) / math.sqrt(2.0)
    z[1:n] = half
    z[n + 1 :] = np.conj(half[::-1])
    return np.fft.fft(np.sqrt(eigs / (2 * n)) * z).real[:n]


def _cholesky_factor(H: float, n: int, step: float) -> np.ndarray:
    idx = np.arange(n)
    cov = fgn_autocovariance(np.abs(idx[:, None] - idx[None, :]), H, step)
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(
            "fGn covariance is not numerically positive definite; "
            "cannot generate an exact path"
        ) from exc


_chol_cache: dict[tuple[float, int, float], np.ndarray] = {}


def generate_path(model: HurstModel, grid: TimeGrid, seed: int, path_index: int = 0) -> FbmPath:
    """Exact d-dimensional fBm sample on the grid nodes.

    Circulant embedding is used unless an embedding eigenvalue falls below
    -1e-10 times the largest one, in which case the exact covariance is
    Cholesky-factorized instead.  Deterministic given (seed, path_index,
    method, n, H, d).
    """
    n = grid.n
    eigs = _embedding_eigenvalues(model.H, n, grid.step)
    max_eig = eigs.max()
    if eigs.min() < -_NEG_EIG_RTOL * max_eig:
        method = GenerationMethod.CHOLESKY
        key = (model.H, n, grid.step)
        if key not in _chol_cache:
            _chol_cache[key] = _cholesky_factor(model.H, n, grid.step)
        L = _chol_cache[key]
    else:
        method = GenerationMethod.CIRCULANT_EMBEDDING
        eigs = np.clip(eigs, 0.0, None)
        L = None

    values = np.zeros((model.d, n + 1))
    for comp in range(model.d):
        rng = _component_rng(seed, path_index, comp)
        if method is GenerationMethod.CIRCULANT_EMBEDDING:
            fgn = _fgn_circulant(eigs, n, rng)
        else:
            fgn = L @ rng.standard_normal(n)
        values[comp, 1:] = np.cumsum(fgn)
    return FbmPath(model=model, grid=grid, values=values, seed=seed, method=method)


def generate_ensemble(
    model: HurstModel, grid: TimeGrid, seed: int, n_paths: int, start: int = 0
) -> np.ndarray:
    """Stacked path values, shape (n_paths, d, n+1), for indices start..start+n_paths-1.

    Path i is the same array generate_path(model, grid, seed, i) would return;
    results are independent of how the ensemble is chunked.
    """
    n = grid.n
    eigs = _embedding_eigenvalues(model.H, n, grid.step)
    max_eig = eigs.max()
    use_chol = eigs.min() < -_NEG_EIG_RTOL * max_eig
    if use_chol:
        key = (model.H, n, grid.step)
        if key not in _chol_cache:
            _chol_cache[key] = _cholesky_factor(model.H, n, grid.step)
        L = _chol_cache[key]
    else:
        eigs = np.clip(eigs, 0.0, None)

    out = np.zeros((n_paths, model.d, n + 1))
    for i in range(n_paths):
        for comp in range(model.d):
            rng = _component_rng(seed, start + i, comp)
            if use_chol:
                fgn = L @ rng.standard_normal(n)
            else:
                fgn = _fgn_circulant(eigs, n, rng)
            out[i, comp, 1:] = np.cumsum(fgn)
    return out
