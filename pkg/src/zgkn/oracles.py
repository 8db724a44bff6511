"""Closed-form reference values for the a -> 0 limit and small-a expansions.

* the Sommerfeld fine-structure spectrum,
* the angular eigenvalue k(N, kappa) and its Jacobi-polynomial connector,
* the Coulomb-Dirac radial phase profile built from terminating confluent
  hypergeometric series, with its denominator root count,
* the second-order double series for the angular eigenvalue in a and aE.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import InadmissibleError, sgn


@dataclass(frozen=True)
class SommerfeldIndex:
    M: int
    k: int
    gamma: float

    def __post_init__(self):
        if self.k == 0:
            raise InadmissibleError("k must be nonzero")
        if self.M < 0:
            raise InadmissibleError("M must be nonnegative")
        if self.k > 0 and self.M == 0:
            raise InadmissibleError("k > 0 with M = 0 is excluded")
        if not self.k * self.k > self.gamma * self.gamma:
            raise InadmissibleError("need k^2 > gamma^2")

    @property
    def rho(self) -> float:
        return math.sqrt(self.k * self.k - self.gamma * self.gamma)

    @property
    def energy(self) -> float:
        return sommerfeld_energy(self)

    @property
    def eta(self) -> float:
        E = self.energy
        return math.sqrt(1 - E * E)

    @property
    def n(self) -> int:
        return self.M + abs(self.k)


def sommerfeld_energy(idx: SommerfeldIndex) -> float:
    return 1.0 / math.sqrt(1.0 + idx.gamma ** 2 / (idx.M + idx.rho) ** 2)


def a0_angular_k(N: int, kappa: float) -> int:
    if N == 0:
        raise ValueError("N must be nonzero")
    return int(round(-sgn(N) * (abs(N) + abs(kappa) - 0.5)))


# ---------------------------------------------------------------------------
# Jacobi polynomials and the angular connector


def jacobi(n: int, alpha: float, beta: float, x):
    """P_n^(alpha, beta)(x) by the three-term recurrence in n."""
    x = np.asarray(x)
    p0 = np.ones_like(x, dtype=np.result_type(x, float))
    if n == 0:
        return p0
    p1 = 0.5 * (alpha - beta + (alpha + beta + 2) * x)
    for m in range(2, n + 1):
        s = 2 * m + alpha + beta
        c1 = 2 * m * (m + alpha + beta) * (s - 2)
        c2 = (s - 1) * (alpha * alpha - beta * beta)
        c3 = (s - 2) * (s - 1) * s
        c4 = 2 * (m + alpha - 1) * (m + beta - 1) * s
        p0, p1 = p1, ((c2 + c3 * x) * p1 - c4 * p0) / c1
    return p1


def _theta_parts(N: int, kappa: float):
    n = abs(N) - 1
    ka = abs(kappa)
    num = (ka + 0.5, ka - 0.5)
    den = (ka - 0.5, ka + 0.5)
    return n, num, den


def _theta_denominator_roots(N: int, kappa: float) -> np.ndarray:
    """Roots in (0, pi) of the denominator Jacobi factor, as angles."""
    n, _, den = _theta_parts(N, kappa)
    if n == 0:
        return np.empty(0)
    x = np.cos(np.linspace(0.0, math.pi, 64 * (n + 1) + 1))
    v = jacobi(n, den[0], den[1], x)
    roots = []
    for i in np.nonzero(np.sign(v[:-1]) * np.sign(v[1:]) < 0)[0]:
        lo, hi = x[i], x[i + 1]
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if np.sign(jacobi(n, den[0], den[1], mid)) == np.sign(jacobi(n, den[0], den[1], lo)):
                lo = mid
            else:
                hi = mid
        roots.append(math.acos(0.5 * (lo + hi)))
    return np.sort(np.array(roots))


def jacobi_theta_connector(N: int, kappa: float, theta):
    """Lifted angular phase of the a = 0 eigenfunction with index N.

    Continuous on [0, pi], starting at 0 (kappa > 0) or pi (kappa < 0).
    Accepts complex theta (for complex-step differentiation) away from the
    denominator roots.
    """
    if N == 0:
        raise ValueError("N must be nonzero")
    th = np.asarray(theta)
    real = np.real(th)
    if np.any(real < 0.0) or np.any(real > math.pi):
        raise ValueError("theta must lie in [0, pi]")
    n, num, den = _theta_parts(N, kappa)
    s = sgn(N)
    c = np.cos(th)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = jacobi(n, *num, c) / jacobi(n, *den, c) * np.tan(0.5 * th)
        raw = -2.0 * s * np.arctan(ratio)
    # at theta = pi the tangent blows up; take the one-sided limit
    at_pi = real == math.pi
    if np.any(at_pi):
        lim = np.sign(jacobi(n, *num, -1.0) / jacobi(n, *den, -1.0))
        raw = np.where(at_pi, -s * math.pi * lim, raw)
    roots = _theta_denominator_roots(N, kappa)
    crossings = np.searchsorted(roots, real, side="right") if roots.size else np.zeros(real.shape, dtype=int)
    base = 0.0 if kappa > 0 else math.pi
    out = raw + base - s * 2 * math.pi * crossings
    return out if out.ndim else out[()]


# ---------------------------------------------------------------------------
# radial profile


def confluent_f(a: int, b: float, x):
    """Terminating Kummer series 1F1(a; b; x) for integer a <= 0."""
    if a > 0:
        raise ValueError("series terminates only for a <= 0")
    x = np.asarray(x)
    term = np.ones_like(x, dtype=np.result_type(x, float))
    total = term.copy()
    for m in range(-a):
        term = term * (a + m) / ((b + m) * (m + 1)) * x
        total = total + term
    return total


@dataclass(frozen=True)
class _RadialPoly:
    """Numerator and denominator of the radial phase as polynomials in x = 2 eta r."""

    eta: float
    q: float  # sqrt((1 - E)/(1 + E))
    mu: float
    num: np.ndarray  # ascending coefficients
    den: np.ndarray


def _kummer_coefficients(a: int, b: float) -> np.ndarray:
    coef = [1.0]
    for m in range(-a):
        coef.append(coef[-1] * (a + m) / ((b + m) * (m + 1)))
    return np.array(coef)


def _radial_poly(idx: SommerfeldIndex) -> _RadialPoly:
    M, k, g, rho = idx.M, idx.k, idx.gamma, idx.rho
    # with W = sqrt((M + rho)^2 + gamma^2): E = (M + rho)/W, eta = |gamma|/W,
    # gamma/eta = -W; these forms avoid cancellation when eta is small
    W = math.hypot(M + rho, g)
    eta = abs(g) / W
    q = abs(g) / (W + M + rho)
    b = 2 * rho + 1
    f0 = _kummer_coefficients(-M, b)
    if M == 0:
        return _RadialPoly(eta, q, 0.0, -f0, f0.copy())
    f1 = np.zeros(M + 1)
    f1[:M] = _kummer_coefficients(-M + 1, b)
    mu = M / (k - W)
    num = mu * f1 - f0
    den = mu * f1 + f0
    # constant term of the denominator is mu + 1 = (M + k - W)/(k - W)
    if k > 0:
        den[0] = 2 * M * g * g / ((k + rho) * (M + k + W)) / (k - W)
    else:
        den[0] = (M + k - W) / (k - W)
    return _RadialPoly(eta, q, mu, num, den)


def _horner(coef: np.ndarray, x):
    out = np.zeros_like(x, dtype=np.result_type(x, float)) + coef[-1]
    for c in coef[-2::-1]:
        out = out * x + c
    return out


def denominator_roots(idx: SommerfeldIndex) -> np.ndarray:
    """Positive roots (in x = 2 eta r) of the radial denominator polynomial."""
    poly = _radial_poly(idx)
    if idx.M == 0:
        return np.empty(0)
    den = poly.den
    dden = den[1:] * np.arange(1, len(den))
    r = np.roots(den[::-1])
    r = r[np.abs(r.imag) < 1e-9 * (1 + np.abs(r))].real
    out = []
    for x in np.sort(r[r > 0]):
        for _ in range(50):
            step = float(_horner(den, x)) / float(_horner(dden, x))
            x -= step
            if abs(step) < 1e-15 * max(1.0, abs(x)):
                break
        out.append(x)
    return np.array(out)


def gordon_omega_profile(idx: SommerfeldIndex, r):
    """Lifted radial phase Omega(r), r >= 0, of the a = 0 bound state ``idx``.

    Accepts complex r (for complex-step differentiation) away from the
    denominator roots.
    """
    r = np.asarray(r)
    real = np.real(r)
    if np.any(real < 0.0):
        raise ValueError("r must be nonnegative")
    poly = _radial_poly(idx)
    x = 2 * poly.eta * r
    with np.errstate(divide="ignore", invalid="ignore"):
        raw = 2.0 * np.arctan(poly.q * _horner(poly.num, x) / _horner(poly.den, x))
    raw0 = 2.0 * math.atan(poly.q * poly.num[0] / poly.den[0])
    # the branch offset is a whole number of turns
    shift = 2 * math.pi * round((gordon_omega_zero(idx) - raw0) / (2 * math.pi))
    roots = denominator_roots(idx) / (2 * poly.eta)
    crossings = np.searchsorted(roots, real, side="right") if roots.size else np.zeros(real.shape, dtype=int)
    out = raw + shift - 2 * math.pi * crossings
    return out if out.ndim else out[()]


def gordon_omega_zero(idx: SommerfeldIndex) -> float:
    start = math.asin(-idx.gamma / idx.k)
    return -math.pi - start if idx.k > 0 else start


def gordon_omega_infinity(idx: SommerfeldIndex) -> float:
    return -2 * math.pi * idx.M - math.acos(idx.energy)


def count_denominator_roots(idx: SommerfeldIndex, max_refine: int = 12) -> int:
    """Sign changes of the denominator on refining grids over (0, x_max).

    ``x_max`` exceeds the classical bound on the largest Laguerre zero; the
    grid is doubled until two successive counts agree.
    """
    M = idx.M
    if M == 0:
        return 0
    poly = _radial_poly(idx)
    b = 2 * idx.rho + 1
    x_max = 2 * M + b + 2 + 2 * (M - 1) * math.sqrt(M + b) + 10
    prev = None
    n = 64 * (M + 1)
    for _ in range(max_refine):
        x = np.linspace(0.0, x_max, n + 1)[1:]
        v = _horner(poly.den, x)
        cnt = int(np.count_nonzero(np.sign(v[:-1]) * np.sign(v[1:]) < 0))
        if cnt == prev:
            return cnt
        prev = cnt
        n *= 2
    raise RuntimeError("root count did not stabilize under refinement")


# ---------------------------------------------------------------------------
# small-a series


def bsw_coefficients(kappa: float, N: int) -> dict[tuple[int, int], float]:
    k = a0_angular_k(N, kappa)
    return {
        (0, 0): float(k),
        (1, 0): -kappa / (2 * k + 1),
        (0, 1): -kappa / (2 * k - 1),
        (2, 0): ((2 * k + 1) ** 2 - 4 * kappa ** 2) / (4 * (2 * k + 1) ** 3),
        (1, 1): 0.0,
        (0, 2): ((2 * k - 1) ** 2 - 4 * kappa ** 2) / (4 * (2 * k - 1) ** 3),
    }


def bsw_lambda(kappa: float, N: int, a: float, E: float, convention: str = "printed") -> float:
    """Second-order double series for the angular eigenvalue in mu = a, nu = aE.

    ``convention="printed"`` uses alpha = nu - mu, beta = nu + mu literally.
    ``convention="operator"`` expands the eigenvalue of the angular operator
    used throughout this package, which corresponds to swapping the roles of
    alpha and beta (equivalently mu -> -mu); the two agree at a = 0.
    """
    mu, nu = a, a * E
    if convention == "printed":
        al, be = nu - mu, nu + mu
    elif convention == "operator":
        al, be = nu + mu, nu - mu
    else:
        raise ValueError(f"unknown convention {convention!r}")
    c = bsw_coefficients(kappa, N)
    return (c[0, 0] + c[1, 0] * al + c[0, 1] * be + c[2, 0] * al * al + c[1, 1] * al * be
            + c[0, 2] * be * be)
