"""Gaussian approximate identity and its partial derivatives.

f_eps(x) = (2 pi eps)^{-d/2} exp(-|x|^2 / (2 eps)) on R^d, and the
multi-index derivative

    f_eps^{(k)}(x) = prod_j [(-1)^{k_j} eps^{-k_j/2} He_{k_j}(x_j / sqrt(eps))] * f_eps(x)

with He_m the probabilists' Hermite polynomials.  Everything is branch-free
closed form; the estimator hot loop calls these on large arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["MollifierParams", "f_eps", "f_eps_deriv", "hermite_he"]

# exp(-q) underflows f64 near q = 745; return exact 0 beyond to keep hot
# loops out of subnormal territory.
_EXP_UNDERFLOW = 745.0

# Three-term recurrence is used on the fly up to this order; higher orders
# go through cached monomial coefficient tables.
_RECURRENCE_MAX = 8
_he_coeff_cache: dict[int, np.ndarray] = {}


@dataclass(frozen=True)
class MollifierParams:
    """Width, dimension and derivative multi-index of one kernel."""

    eps: float
    d: int
    k: tuple[int, ...]

    def __post_init__(self):
        if self.eps <= 0.0:
            raise ValueError(f"width must be positive, got {self.eps}")
        if len(self.k) != self.d:
            raise ValueError("multi-index length must equal dimension")
        if any(v < 0 for v in self.k):
            raise ValueError("multi-index entries must be nonnegative")


def _he_coefficients(m: int) -> np.ndarray:
    """Monomial coefficients of He_m, ascending order."""
    if m not in _he_coeff_cache:
        c0 = np.array([1.0])
        c1 = np.array([0.0, 1.0])
        if m == 0:
            _he_coeff_cache[m] = c0
        elif m == 1:
            _he_coeff_cache[m] = c1
        else:
            prev, cur = c0, c1
            for j in range(1, m):
                nxt = np.zeros(j + 2)
                nxt[1:] = cur
                nxt[: j] -= j * prev
                prev, cur = cur, nxt
            _he_coeff_cache[m] = cur
    return _he_coeff_cache[m]


def hermite_he(m: int, z):
    """Probabilists' Hermite polynomial He_m evaluated elementwise."""
    if m < 0:
        raise ValueError("order must be nonnegative")
    z = np.asarray(z, dtype=float)
    if m <= _RECURRENCE_MAX:
        h_prev = np.ones_like(z)
        if m == 0:
            return h_prev
        h = z.copy()
        for j in range(1, m):
            h_prev, h = h, z * h - j * h_prev
        return h
    coeffs = _he_coefficients(m)
    return np.polynomial.polynomial.polyval(z, coeffs)


def _as_points(x, d_hint=None) -> np.ndarray:
    pts = np.asarray(x, dtype=float)
    if pts.ndim == 0:
        pts = pts[None]
    return pts


def f_eps(x, eps: float):
    """Gaussian mollifier value at x (last axis = space dimension).

    Scalars and 1-d arrays are treated as a single point; arrays of shape
    (..., d) evaluate pointwise over leading axes.
    """
    if eps <= 0.0:
        raise ValueError(f"width must be positive, got {eps}")
    pts = _as_points(x)
    d = pts.shape[-1]
    q = np.sum(pts * pts, axis=-1) / (2.0 * eps)
    norm = (2.0 * math.pi * eps) ** (-d / 2.0)
    # exp(-inf) = 0.0 exactly; keeps oversized exponents out of subnormals
    q = np.where(q > _EXP_UNDERFLOW, np.inf, q)
    out = norm * np.exp(-q)
    if out.ndim == 0:
        return float(out)
    return out


def f_eps_deriv(x, eps: float, k) -> float | np.ndarray:
    """Multi-index partial derivative of the mollifier at x.

    Closed form: each coordinate contributes (-1)^{k_j} eps^{-k_j/2}
    He_{k_j}(x_j / sqrt(eps)); for k = e_j this reduces to -(x_j/eps) f_eps(x).
    """
    if eps <= 0.0:
        raise ValueError(f"width must be positive, got {eps}")
    pts = _as_points(x)
    d = pts.shape[-1]
    k = tuple(int(v) for v in np.atleast_1d(k))
    if len(k) != d:
        raise ValueError(f"multi-index length {len(k)} != dimension {d}")
    if any(v < 0 for v in k):
        raise ValueError("multi-index entries must be nonnegative")
    base = f_eps(pts, eps)
    factor = np.ones(pts.shape[:-1])
    inv_sqrt_eps = eps ** -0.5
    for j, kj in enumerate(k):
        if kj == 0:
            continue
        sign = -1.0 if kj % 2 else 1.0
        factor = factor * sign * eps ** (-kj / 2.0) * hermite_he(kj, pts[..., j] * inv_sqrt_eps)
    out = factor * base
    if out.ndim == 0:
        return float(out)
    return out
