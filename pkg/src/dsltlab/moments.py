"""Closed-form second-moment machinery for pairs of path increments.

Two increments B_s - B_r and B_{s'} - B_{r'} of one fBm component have
variances lambda = |s-r|^{2H}, rho = |s'-r'|^{2H} and covariance mu.  The
four time points fall into one of three orderings; in gap coordinates
(a, b, c) each ordering has an exact second-difference formula for 2*mu.

mu is stored SIGNED throughout; absolute values are applied only by the
callers that need them (bound ratios, the absolute-convention variance
integrands, mu_bridge).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = [
    "Ordering",
    "PairGeometry",
    "PairMoments",
    "PrefactorMode",
    "mu_exact",
    "mu_bridge",
    "pair_kernel",
    "pair_moments",
    "chaos_coefficient",
    "chaos_inner_kernel",
    "lemma_lower_bound_gap",
]

_CHAOS_ORDER_GUARD = 20


class Ordering(enum.Enum):
    """Relative ordering of the two increments [r, s] and [r', s']."""

    OVERLAPPING = "overlapping"  # r < r' < s < s':  a = r'-r, b = s-r',  c = s'-s
    NESTED = "nested"            # r < r' < s' < s:  a = r'-r, b = s'-r', c = s-s'
    DISJOINT = "disjoint"        # r < s < r' < s':  a = s-r,  b = r'-s,  c = s'-r'


class PrefactorMode(enum.Enum):
    """Prefactor convention for the pair kernel.

    PER_COORDINATE (prefactor 1) is the convention for a single first-order
    partial; D_SQUARED carries the d^2 constant the asymptotic variance
    formulas are normalized with.  The Gauss-Hermite oracle in the test
    suite elects PER_COORDINATE.
    """

    PER_COORDINATE = "per-coordinate"
    D_SQUARED = "d-squared"


@dataclass(frozen=True)
class PairGeometry:
    """One increment-pair configuration in gap coordinates."""

    region: Ordering
    a: float
    b: float
    c: float
    H: float

    def __post_init__(self):
        if min(self.a, self.b, self.c) < 0:
            raise ValueError("gaps must be nonnegative")
        if not 0.0 < self.H < 1.0:
            raise ValueError(f"Hurst index must be in (0, 1), got {self.H}")

    @classmethod
    def from_times(cls, r: float, s: float, rp: float, sp: float, H: float) -> "PairGeometry":
        """Classify (r, s) and (r', s') with r < s, r' < s' into a geometry."""
        if not (r < s and rp < sp):
            raise ValueError("need r < s and r' < s'")
        if r > rp:  # canonical order: first increment starts first
            r, s, rp, sp = rp, sp, r, s
        if s <= rp:
            return cls(Ordering.DISJOINT, s - r, rp - s, sp - rp, H)
        if sp <= s:
            return cls(Ordering.NESTED, rp - r, sp - rp, s - sp, H)
        return cls(Ordering.OVERLAPPING, rp - r, s - rp, sp - s, H)


@dataclass(frozen=True)
class PairMoments:
    """(lambda, rho, mu) of a pair, with the regularized determinant."""

    lam: float
    rho: float
    mu: float

    def det_reg(self, eps: float) -> float:
        return (eps + self.lam) * (eps + self.rho) - self.mu * self.mu


def mu_exact(geom: PairGeometry) -> float:
    """Signed increment covariance from the second-difference identities."""
    a, b, c, H = geom.a, geom.b, geom.c, geom.H
    p = 2.0 * H
    if geom.region is Ordering.OVERLAPPING:
        two_mu = (a + b + c) ** p + b ** p - a ** p - c ** p
    elif geom.region is Ordering.NESTED:
        two_mu = (a + b) ** p + (b + c) ** p - a ** p - c ** p
    else:
        two_mu = (a + b + c) ** p + b ** p - (a + b) ** p - (c + b) ** p
    return 0.5 * two_mu


def pair_moments(geom: PairGeometry) -> PairMoments:
    p = 2.0 * geom.H
    a, b, c = geom.a, geom.b, geom.c
    if geom.region is Ordering.OVERLAPPING:
        lam, rho = (a + b) ** p, (b + c) ** p
    elif geom.region is Ordering.NESTED:
        lam, rho = (a + b + c) ** p, b ** p
    else:
        lam, rho = a ** p, c ** p
    return PairMoments(lam=lam, rho=rho, mu=mu_exact(geom))


def mu_bridge(x: float, u1: float, u2: float, H: float):
    """|cov| of the increments [0, u1] and [x, x+u2], from the covariance function.

    Equals |0.5*((x+u2)^{2H} + |x-u1|^{2H} - x^{2H} - |x+u2-u1|^{2H})|;
    broadcasts over array inputs.
    """
    x = np.asarray(x, dtype=float)
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    if np.any(x < 0) or np.any(u1 < 0) or np.any(u2 < 0):
        raise ValueError("gap and lengths must be nonnegative")
    p = 2.0 * H
    out = 0.5 * np.abs(
        (x + u2) ** p + np.abs(x - u1) ** p - x ** p - np.abs(x + u2 - u1) ** p
    )
    if out.ndim == 0:
        return float(out)
    return out


def pair_kernel(eps: float, sigma, d: int, mode: PrefactorMode = PrefactorMode.PER_COORDINATE) -> float:
    """Closed-form E[df(X) df(Y)] for jointly Gaussian pairs of d-vectors.

    sigma is the 2x2 per-coordinate covariance (same for every coordinate,
    coordinates independent).  Value: pref * (2 pi)^{-d} * det^{-d/2-1} * sigma12
    with det = (eps+s11)(eps+s22) - s12^2, pref = 1 or d^2 per mode.
    """
    if eps <= 0.0:
        raise ValueError(f"width must be positive, got {eps}")
    s = np.asarray(sigma, dtype=float)
    s11, s22, s12 = s[0, 0], s[1, 1], s[0, 1]
    det = (eps + s11) * (eps + s22) - s12 * s12
    if det <= 0.0:
        raise ValueError(f"regularized determinant must be positive, got {det}")
    pref = float(d * d) if mode is PrefactorMode.D_SQUARED else 1.0
    return pref * (2.0 * math.pi) ** (-d) * det ** (-d / 2.0 - 1.0) * s12


def chaos_coefficient(q_multi, d: int) -> float:
    """Chaos-expansion coefficient for the multi-index (q_1, ..., q_d).

    beta = (-1)^q * d / ((2q-1)! (2 pi)^{d/2}) * prod (2q_i)! / (prod q_i! * 2^q)
    with q = sum q_i >= 1.  The rational part is evaluated exactly and
    rounded once; at d = 2 this reduces to the two-index special case.
    """
    q_multi = tuple(int(v) for v in q_multi)
    if len(q_multi) != d:
        raise ValueError(f"multi-index length {len(q_multi)} != dimension {d}")
    if any(v < 0 for v in q_multi):
        raise ValueError("multi-index entries must be nonnegative")
    q = sum(q_multi)
    if q < 1:
        raise ValueError("total order must be >= 1")
    if q > _CHAOS_ORDER_GUARD:
        raise OverflowError(f"total order {q} exceeds the exact-arithmetic guard {_CHAOS_ORDER_GUARD}")
    num = d
    for qi in q_multi:
        num *= math.factorial(2 * qi)
    den = math.factorial(2 * q - 1) * 2 ** q
    for qi in q_multi:
        den *= math.factorial(qi)
    rational = Fraction(num, den)
    if q % 2 == 1:
        rational = -rational
    return float(rational) * (2.0 * math.pi) ** (-d / 2.0)


def chaos_inner_kernel(eps: float, x: float, u1: float, u2: float, q: int, d: int, H: float) -> float:
    """Inner-product kernel of two order-(2q-1) chaos integrands.

    (eps + u1^{2H})^{-d/2-q} (eps + u2^{2H})^{-d/2-q} mu_bridge(x,u1,u2)^{2q-1}
    """
    if eps <= 0.0:
        raise ValueError(f"width must be positive, got {eps}")
    if q < 1:
        raise ValueError(f"chaos order must be >= 1, got {q}")
    p = 2.0 * H
    w1 = (eps + u1 ** p) ** (-d / 2.0 - q)
    w2 = (eps + u2 ** p) ** (-d / 2.0 - q)
    return w1 * w2 * mu_bridge(x, u1, u2, H) ** (2 * q - 1)


def lemma_lower_bound_gap(geom: PairGeometry) -> float:
    """Ratio (lambda*rho - mu^2) / region bound expression.

    Bound expressions: overlapping (a+b)^{2H} c^{2H} + a^{2H} (b+c)^{2H};
    nested b^{2H} (a^{2H} + c^{2H}); disjoint (ac)^{2H}.  Positivity of the
    ratio over sampled geometries is the testable content of the bound.
    """
    m = pair_moments(geom)
    gap = m.lam * m.rho - m.mu * m.mu
    p = 2.0 * geom.H
    a, b, c = geom.a, geom.b, geom.c
    if geom.region is Ordering.OVERLAPPING:
        expr = (a + b) ** p * c ** p + a ** p * (b + c) ** p
    elif geom.region is Ordering.NESTED:
        expr = b ** p * (a ** p + c ** p)
    else:
        expr = (a * c) ** p
    if expr == 0.0:
        raise ZeroDivisionError("bound expression vanishes for this geometry")
    return gap / expr
