"""Closed forms for Lissajoux curves (1/k sin kt, 1/k cos kt, 1/l sin lt, 1/l cos lt).

Gamma(t_1, t_2) = gamma(t_1) + F gamma'(t_1) + G gamma''(t_1) with
F = Delta_1 / Delta, G = Delta_2 / Delta, all functions of the half
difference t = (t_2 - t_1) / 2 only.  For l = k + 1 the elliptic-hull
volume reduces to a one-dimensional integral, evaluated here by
Gauss-Legendre quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb

import numpy as np

from .trigcurve import TrigCurve, make_lissajoux


class IllDefinedGammaError(ArithmeticError):
    """Delta vanishes away from the diagonal (happens iff l - k != 1)."""


@dataclass(frozen=True)
class LissajouxParams:
    k: int
    l: int

    def __post_init__(self):
        if self.k < 1 or self.l < 1:
            raise ValueError("k and l must be positive")
        if self.k >= self.l:
            raise ValueError(f"need k < l, got k={self.k}, l={self.l}")

    @property
    def well_defined(self) -> bool:
        return self.l - self.k == 1

    def curve(self) -> TrigCurve:
        return make_lissajoux(self.k, self.l)


@dataclass(frozen=True)
class FGValue:
    F: float
    G: float
    Delta: float
    Delta1: float
    Delta2: float


def _delta_parts(k, l, half):
    lk = (l + k) * np.sin((l - k) * half) - (l - k) * np.sin((l + k) * half)
    delta = (l + k) ** 2 * np.sin((l - k) * half) ** 2 - (l - k) ** 2 * np.sin((l + k) * half) ** 2
    delta1 = (l * l - k * k) / (l * k) * (np.cos((l - k) * half) - np.cos((l + k) * half)) * lk
    delta2 = lk**2 / (k * l)
    return delta, delta1, delta2


def deltas(params: LissajouxParams, t1: float, t2: float, tol: float = 1e-300) -> FGValue:
    """Delta, Delta_1, Delta_2 and F, G at (t1, t2); F = G = 0 on the diagonal."""
    half = (t2 - t1) / 2.0
    delta, delta1, delta2 = (float(v) for v in _delta_parts(params.k, params.l, half))
    on_diagonal = abs(math.sin(half)) < 1e-15
    if abs(delta) <= tol:
        if not on_diagonal:
            raise IllDefinedGammaError(
                f"Delta = 0 at s = t2 - t1 = {t2 - t1!r} for k={params.k}, l={params.l}"
            )
        return FGValue(0.0, 0.0, delta, delta1, delta2)
    return FGValue(delta1 / delta, delta2 / delta, delta, delta1, delta2)


def delta_curve(params: LissajouxParams, s) -> np.ndarray:
    """Delta as a function of s = t2 - t1 (vectorized)."""
    return _delta_parts(params.k, params.l, np.asarray(s, dtype=float) / 2.0)[0]


def closed_gamma(params: LissajouxParams, t1: float, t2: float) -> np.ndarray:
    if not params.well_defined:
        raise IllDefinedGammaError(f"Gamma is only well defined for l - k = 1 (k={params.k}, l={params.l})")
    curve = params.curve()
    if t1 == t2:
        return curve(t1)
    fg = deltas(params, t1, t2)
    d = curve.derivatives(t1, 2)
    return d[0] + fg.F * d[1] + fg.G * d[2]


def w_const(params: LissajouxParams) -> float:
    """det[gamma, gamma', gamma'', gamma'''], constant in t."""
    k, l = params.k, params.l
    return (l * l - k * k) ** 2 / (l * k)


def gfh(k: int, t: float) -> tuple[float, float, float, float]:
    """g(t), f(t), df/dt and h(t) for the l = k + 1 reduction."""
    a = 2 * k + 1
    denom = a * math.sin(t) + math.sin(a * t)
    if denom == 0.0:
        raise ZeroDivisionError(f"(2k+1) sin t + sin (2k+1)t vanishes at t={t!r}")
    g = (a * math.sin(t) - math.sin(a * t)) / (k * (k + 1) * denom)
    f = a * (math.cos(t) - math.cos(a * t)) / (k * (k + 1) * denom)
    dfdt = 4 * a * math.sin(t) * math.sin(a * t) / denom**2
    return g, f, dfdt, h_poly(k, t)


def h_poly(k: int, t):
    """h(t) with sin((2k+1)t) = h(t) sin t, as the binomial sum."""
    c2 = np.cos(t) ** 2
    return sum((-1) ** m * comb(2 * k + 1, 2 * m + 1) * (1 - c2) ** m * c2 ** (k - m) for m in range(k + 1))


def p_poly(k: int, x):
    """P_k(x) = sum_m (-1)^m C(2k+1, 2m+1) x^m."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return sum((-1) ** m * comb(2 * k + 1, 2 * m + 1) * np.asarray(x, dtype=float) ** m for m in range(k + 1))


def p_coefficients(k: int) -> list[int]:
    """Integer coefficients of P_k in increasing degree."""
    return [(-1) ** m * comb(2 * k + 1, 2 * m + 1) for m in range(k + 1)]


def i_m(m: int) -> float:
    """Integral of (1 + z^2)^(-m) over the real line."""
    if m < 1:
        raise ValueError("m must be >= 1")
    ratio = 1.0
    for j in range(1, m):
        ratio *= (2 * j - 1) / (2 * j)
    return ratio * math.pi


def _reduced_integrand(k: int, z):
    """Integrand of the z-integral; z = tan(theta) maps it to (-pi/2, pi/2)."""
    a = 2 * k + 1
    u = 1.0 + z * z
    p = p_poly(k, z * z)
    return (a * u**k - p) ** 2 / (a * u**k + p) ** 4 * p * u ** (k - 1)


def vol_eh_closed(k: int, quad_points: int = 200) -> float:
    """Elliptic-hull volume of the Lissajoux curve with l = k + 1.

    The improper z-integral is pulled back by z = tan(theta) (dz =
    (1 + z^2) d theta) and integrated with Gauss-Legendre nodes.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    theta, w = np.polynomial.legendre.leggauss(quad_points)
    theta = theta * (math.pi / 2)
    z = np.tan(theta)
    vals = _reduced_integrand(k, z) * (1.0 + z * z)
    integral = math.fsum((w * vals).tolist()) * (math.pi / 2)
    prefactor = math.pi * (2 * k + 1) ** 3 / (2 * k**3 * (k + 1) ** 3)
    vol = -prefactor * integral
    if not vol > 0:
        raise ArithmeticError(f"closed-form volume is not positive ({vol!r})")
    return vol


def vol_eh_closed_via_g(k: int, quad_points: int = 200) -> float:
    """The same volume from the g^2 df/dt form over t in (-pi/2, pi/2)."""
    theta, w = np.polynomial.legendre.leggauss(quad_points)
    theta = theta * (math.pi / 2)
    vals = []
    for t in theta:
        g, _, dfdt, _ = gfh(k, float(t))
        vals.append(g * g * dfdt)
    integral = math.fsum((w * np.array(vals)).tolist()) * (math.pi / 2)
    return -math.pi * (2 * k + 1) ** 2 / (8 * k * (k + 1)) * integral


def vol_eh_k1_via_im() -> float:
    """k = 1: (9 pi sqrt3 / 16)(-2 I_4 + 5 I_3 - 4 I_2 + I_1)."""
    return 9 * math.pi * math.sqrt(3) / 16 * (-2 * i_m(4) + 5 * i_m(3) - 4 * i_m(2) + i_m(1))


EH_CONSTANT_R4 = 9 * math.pi**2 * math.sqrt(3) / 64
