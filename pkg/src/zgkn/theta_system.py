"""The angular flow and the search for its eigenvalue lambda_N(E).

With theta(tau) = 2 atan(exp(tau)) the angular Prufer phase obeys

    dtheta/dtau = sin theta
    dTheta/dtau = -2a sin cos cos Theta + 2aE sin^2 sin Theta - 2 kappa sin Theta + 2 lambda sin theta

on [0, pi] x S^1. Its winding decreases as lambda increases, so the search
parameter is lambda with orientation -1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .cylinder import ConnectorResult, CylinderField, Equilibria, find_connector
from .params import ModelParams, WindingTarget

BRACKET_MARGIN = 0.05


@njit(cache=True)
def _kernel(t, s, p):
    # theta(tau) = 2 atan(exp(tau)) in closed form; only Theta carries numerical error
    a, E, kappa, lam = p[0], p[1], p[2], p[3]
    st = 1.0 / math.cosh(t) if abs(t) < 700.0 else 0.0
    ct = -math.tanh(t)
    sT = math.sin(s[1])
    return st, -2.0 * a * st * ct * math.cos(s[1]) + 2.0 * a * E * st * st * sT - 2.0 * kappa * sT + 2.0 * lam * st


@dataclass(frozen=True)
class ThetaContext:
    params: ModelParams
    E: float

    def __post_init__(self):
        if not 0.0 <= self.E <= 1.0:
            raise ValueError(f"E={self.E} outside [0, 1]")


@dataclass(frozen=True)
class SaddleData:
    s_minus: tuple[float, float]
    n_minus: tuple[float, float]
    s_plus: tuple[float, float]
    n_plus: tuple[float, float]
    domain: tuple[float, float]
    eigenvalues_minus: tuple[float, float]
    eigenvalues_plus: tuple[float, float]
    slope: float

    @property
    def tangent(self) -> tuple[float, float]:
        nrm = math.hypot(1.0, self.slope)
        return 1.0 / nrm, self.slope / nrm


def theta_rhs(state, ctx: ThetaContext, lam: float) -> tuple[float, float]:
    th, Th = state
    a, kappa, E = ctx.params.a, ctx.params.kappa, ctx.E
    s, c = math.sin(th), math.cos(th)
    return s, -2 * a * s * c * math.cos(Th) + 2 * a * E * s * s * math.sin(Th) - 2 * kappa * math.sin(Th) + 2 * lam * s


def _equilibria(kappa: float) -> Equilibria:
    if kappa > 0:
        return Equilibria(n_minus=-math.pi, s_minus=0.0, s_plus=-math.pi, n_plus=0.0)
    return Equilibria(n_minus=0.0, s_minus=math.pi, s_plus=0.0, n_plus=math.pi)


def _slope(a: float, kappa: float, lam: float) -> float:
    if kappa > 0:
        return (lam - a) / (0.5 + kappa)
    return (lam + a) / (0.5 - kappa)


def saddle_data(ctx: ThetaContext, lam: float) -> SaddleData:
    kappa = ctx.params.kappa
    if kappa == 0:
        raise ValueError("kappa must be nonzero")
    eq = _equilibria(kappa)
    y0 = -math.pi if kappa > 0 else 0.0
    k2 = 2 * abs(kappa)
    return SaddleData(
        s_minus=(0.0, eq.s_minus), n_minus=(0.0, eq.n_minus),
        s_plus=(math.pi, eq.s_plus), n_plus=(math.pi, eq.n_plus),
        domain=(y0, y0 + 2 * math.pi),
        eigenvalues_minus=(1.0, -k2), eigenvalues_plus=(-1.0, k2),
        slope=_slope(ctx.params.a, kappa, lam),
    )


def _theta_of_tau(tau: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    th = 2.0 * np.arctan(np.exp(tau))
    return th, np.sin(th)


def theta_field(ctx: ThetaContext) -> CylinderField:
    a, kappa, E = ctx.params.a, ctx.params.kappa, ctx.E
    if kappa == 0:
        raise ValueError("kappa must be nonzero")
    eq = _equilibria(kappa)

    def g(x, y, lam):
        return theta_rhs((x, y), ctx, lam)[1]

    return CylinderField(
        x_minus=0.0, x_plus=math.pi,
        f=lambda x: 0.0 if x in (0.0, math.pi) else math.sin(x),
        g=g,
        y0=-math.pi if kappa > 0 else 0.0,
        equilibria=lambda lam: eq,
        orientation=-1,
        name="theta",
        kernel=_kernel,
        kernel_params=lambda lam: np.array([a, E, kappa, lam]),
        tau_of_x=lambda th: math.log(math.tan(0.5 * th)),
        x_of_tau=_theta_of_tau,
        unstable_slope=lambda lam: _slope(a, kappa, lam),
        stable_slope=lambda lam: _slope(a, kappa, lam),
        attest_heteroclinic=True,
    )


def bracket_index(n_theta: int) -> int:
    """Angular index N attached to a Theta winding (the a -> 0 eigenvalue label)."""
    return n_theta + 1 if n_theta >= 0 else n_theta


def theorem_bracket(ctx: ThetaContext, n_theta: int) -> tuple[float, float]:
    """Interval for lambda containing the connector with winding ``n_theta``.

    Both signs of kappa use the |kappa| form of the bounds. A mirrored inner
    bound 1/2 - kappa + a for kappa < 0 only holds at E = 1; for E < 1 the
    connector sits below it.
    """
    a, q = ctx.params.a, 0.5 + abs(ctx.params.kappa)
    n = n_theta
    if n >= 0:
        lo_neg, hi_neg = q - a, (2 * n + 1) * q + 2 * a
    else:
        lo_neg, hi_neg = (2 * n + 1) * q - 2 * a, -q + a
    return -hi_neg, -lo_neg


def lambda_bracket(ctx: ThetaContext, n_theta: int, margin: float = BRACKET_MARGIN) -> tuple[float, float]:
    lo, hi = theorem_bracket(ctx, n_theta)
    pad_lo = margin * max(abs(lo), hi - lo, 1e-3)
    pad_hi = margin * max(abs(hi), hi - lo, 1e-3)
    return lo - pad_lo, hi + pad_hi


def find_lambda(ctx: ThetaContext, n_theta: int, tol: float = 1e-9,
                bracket: tuple[float, float] | None = None) -> ConnectorResult:
    if bracket is None:
        bracket = lambda_bracket(ctx, n_theta)
    return find_connector(theta_field(ctx), n_theta, bracket, tol)


def expected_terminal_lift(kappa: float, n_theta: int) -> float:
    """Endpoint value Theta(pi) of the connector with the given winding."""
    N = bracket_index(n_theta)
    s = 1 if N > 0 else -1
    base = -s * math.pi if kappa > 0 else math.pi - s * math.pi
    return -s * (abs(N) - 1) * 2 * math.pi + base
