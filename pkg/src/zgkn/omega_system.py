"""The radial flow and the search for its eigenvalue E_N(lambda).

On the cylinder [-pi/2, pi/2] x S^1 (with r = a tan xi, tau = r/a)

    dxi/dtau = cos^2 xi
    dOmega/dtau = 2a sin xi cos Omega + 2 lambda cos xi sin Omega
                  + 2 gamma sin xi cos xi + 2 kappa cos^2 xi - 2aE.

The boundary equilibria are saddle-nodes whose approach rate 2a sqrt(1-E^2)
is tiny for small a, so orbits are actually integrated in r over
[-R, R], where the same dynamics reads

    dOmega/dr = 2 (r/w) cos Omega + 2 (lambda/w) sin Omega + 2 (a kappa + gamma r)/w^2 - 2E,

w = sqrt(r^2 + a^2). Winding increases with E.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from . import _dopri
from .cylinder import (ATOL, MAX_STEPS, RTOL, ConnectorResult, CylinderField, Equilibria, IntegrationError,
                       Orbit, find_connector)
from .params import InadmissibleError, ModelParams

E_FLOOR = 1e-6
E_CEIL = 1.0 - 1e-6


@njit(cache=True)
def _kernel(r, s, p):
    a, lam, gamma, kappa, E = p[0], p[1], p[2], p[3], p[4]
    w2 = r * r + a * a
    w = math.sqrt(w2)
    om = s[1]
    return 1.0, 2.0 * (r / w) * math.cos(om) + 2.0 * (lam / w) * math.sin(om) + 2.0 * (a * kappa + gamma * r) / w2 - 2.0 * E


@dataclass(frozen=True)
class OmegaContext:
    params: ModelParams
    lam: float

    @property
    def lambda_admissible(self) -> bool:
        """Whether lambda lies in the range where the Theta theory puts its eigenvalues."""
        a, kappa = self.params.a, abs(self.params.kappa)
        if self.lam < 0:
            return self.lam <= -0.5 - kappa + a
        return self.lam >= 0.5 + kappa - a


@dataclass(frozen=True)
class SaddleNodeData:
    s_minus: float
    n_minus: float
    s_plus: float
    n_plus: float
    domain: tuple[float, float]
    eigenvalues: tuple[float, float]
    center_slope: float

    @property
    def tangent(self) -> tuple[float, float]:
        nrm = math.hypot(1.0, self.center_slope)
        return 1.0 / nrm, self.center_slope / nrm


def omega_rhs_tau(state, ctx: OmegaContext, E: float) -> tuple[float, float]:
    xi, om = state
    p = ctx.params
    sx, cx = math.sin(xi), math.cos(xi)
    return cx * cx, (2 * p.a * sx * math.cos(om) + 2 * ctx.lam * cx * math.sin(om)
                     + 2 * p.gamma * sx * cx + 2 * p.kappa * cx * cx - 2 * p.a * E)


def omega_rhs_r(state, ctx: OmegaContext, E: float) -> float:
    r, om = state
    p = ctx.params
    w2 = r * r + p.a * p.a
    w = math.sqrt(w2)
    return 2 * (r / w) * math.cos(om) + 2 * (ctx.lam / w) * math.sin(om) + 2 * (p.a * p.kappa + p.gamma * r) / w2 - 2 * E


def _check_energy(E: float) -> None:
    if not 0.0 < E < 1.0:
        raise ValueError(f"E={E} must lie in (0, 1); the saddle-nodes merge at E = 1")


def _equilibria(E: float) -> Equilibria:
    c = math.acos(E)
    return Equilibria(n_minus=-math.pi - c, s_minus=-math.pi + c, s_plus=-c, n_plus=c)


def saddle_node_data(ctx: OmegaContext, E: float) -> SaddleNodeData:
    _check_energy(E)
    eq = _equilibria(E)
    eta = math.sqrt(1 - E * E)
    a = ctx.params.a
    slope = (-ctx.params.gamma - ctx.lam * eta) / (a * eta)
    return SaddleNodeData(eq.s_minus, eq.n_minus, eq.s_plus, eq.n_plus, (-1.5 * math.pi, 0.5 * math.pi),
                          (0.0, -2 * a * eta), slope)


def radial_extent(a: float, E: float) -> float:
    eta = math.sqrt(1 - E * E)
    return max(50.0, 50.0 / eta, 2000.0 * a)


def _asymptotic_offset(ctx: OmegaContext, E: float, r: float) -> float:
    """Slow-manifold offset from s+ (r > 0) or s- (r < 0), to second order in 1/r."""
    p = ctx.params
    eta = math.sqrt(1 - E * E)
    lam, gamma, a, kappa = ctx.lam, p.gamma, p.a, p.kappa
    if r > 0:
        c1 = (lam * eta - gamma) / eta
        c2 = (-c1 + E * c1 * c1 + a * a * E - 2 * lam * E * c1 - 2 * a * kappa) / (2 * eta)
        return c1 / r + c2 / (r * r)
    return (gamma + lam * eta) / (eta * r)


def _to_orbit(buf: np.ndarray, a: float) -> Orbit:
    r, _, om, _, dom = buf
    xi = np.arctan2(r, a)
    cx = np.cos(xi)
    return Orbit(tau=r / a, x=xi, y=om.copy(), dx=cx * cx, dy=a * dom)


def _integrate_r(ctx: OmegaContext, E: float, r0: float, om0: float, r1: float) -> Orbit:
    p = ctx.params
    pars = np.array([p.a, ctx.lam, p.gamma, p.kappa, E])
    buf, status = _dopri.dopri(_kernel, r0, r0, om0, r1, pars, RTOL, ATOL, 0.0, MAX_STEPS)
    if status != _dopri.OK:
        msg = {_dopri.STEP_UNDERFLOW: "step size underflow", _dopri.NON_FINITE: "non-finite state"}.get(
            status, "step budget exhausted")
        raise IntegrationError(msg, (buf[0, -1] / p.a, math.atan2(buf[0, -1], p.a), buf[2, -1]))
    if r1 < r0:
        buf = buf[:, ::-1]
    return _to_orbit(np.ascontiguousarray(buf), p.a)


def shoot(ctx: OmegaContext, E: float) -> Orbit:
    """Center manifold of S-(E), integrated in r from -R to R."""
    _check_energy(E)
    R = radial_extent(ctx.params.a, E)
    eq = _equilibria(E)
    return _integrate_r(ctx, E, -R, eq.s_minus + _asymptotic_offset(ctx, E, -R), R)


def shoot_stable(ctx: OmegaContext, E: float, shift: int) -> Orbit:
    """Center manifold of the copy s+ - 2 pi shift, integrated backward from R to -R."""
    _check_energy(E)
    R = radial_extent(ctx.params.a, E)
    eq = _equilibria(E)
    return _integrate_r(ctx, E, R, eq.s_plus - 2 * math.pi * shift + _asymptotic_offset(ctx, E, R), -R)


def omega_field(ctx: OmegaContext) -> CylinderField:
    p = ctx.params

    def g(xi, om, E):
        return omega_rhs_tau((xi, om), ctx, E)[1]

    def estimate(lower: Orbit, upper: Orbit, E: float, split: float = 1e-6) -> float:
        r_lo = lower.tau * p.a
        r_hi = upper.tau * p.a
        mask = (r_lo >= max(r_lo[0], r_hi[0])) & (r_lo <= min(r_lo[-1], r_hi[-1])) & (r_lo > 0)
        rs = r_lo[mask]
        ys = lower.y[mask]
        gap = np.abs(np.interp(rs, r_hi, upper.y) - ys)
        apart = np.nonzero(gap > split)[0]
        i = max((apart[0] - 1) if apart.size else len(rs) - 1, 0)
        return float(ys[i] - _asymptotic_offset(ctx, E, rs[i]))

    return CylinderField(
        x_minus=-0.5 * math.pi, x_plus=0.5 * math.pi,
        f=lambda xi: math.cos(xi) ** 2,
        g=g,
        y0=-1.5 * math.pi,
        equilibria=_equilibria,
        orientation=1,
        name="omega",
        shooter=lambda E: shoot(ctx, E),
        stable_shooter=lambda E, m: shoot_stable(ctx, E, m),
        terminal_estimate=estimate,
        attest_heteroclinic=p.in_guaranteed_region and ctx.lambda_admissible,
    )


def find_E(ctx: OmegaContext, n_omega: int, tol: float = 1e-9,
           bracket: tuple[float, float] = (E_FLOOR, E_CEIL)) -> ConnectorResult:
    if n_omega < 0 or (ctx.lam > 0 and n_omega < 1):
        raise InadmissibleError(
            f"no radial connector with winding {n_omega} for lambda={ctx.lam:+.6g}")
    return find_connector(omega_field(ctx), n_omega, bracket, tol)


def expected_terminal_lift(E: float, n_omega: int) -> float:
    return -2 * math.pi * n_omega - math.acos(E)


@dataclass(frozen=True)
class BarrierReport:
    line: float
    max_rate: float
    argmax_xi: float
    holds: bool
    in_hypotheses: bool

    def to_dict(self) -> dict:
        return {"line": self.line, "max_rate": self.max_rate, "argmax_xi": self.argmax_xi,
                "holds": self.holds, "in_hypotheses": self.in_hypotheses}


def barrier_check(ctx: OmegaContext, E: float, grid: int = 1001) -> BarrierReport:
    """Largest dOmega/dtau on the horizontal line Omega = pi/2 (lambda < 0) or -pi/2 (lambda > 0)."""
    line = 0.5 * math.pi if ctx.lam < 0 else -0.5 * math.pi
    xi = np.linspace(-0.5 * math.pi, 0.5 * math.pi, grid)
    p = ctx.params
    sx, cx = np.sin(xi), np.cos(xi)
    rate = (2 * p.a * sx * math.cos(line) + 2 * ctx.lam * cx * math.sin(line) + 2 * p.gamma * sx * cx
            + 2 * p.kappa * cx * cx - 2 * p.a * E)
    i = int(np.argmax(rate))
    return BarrierReport(line=line, max_rate=float(rate[i]), argmax_xi=float(xi[i]), holds=bool(rate[i] < 0),
                         in_hypotheses=p.in_guaranteed_region and ctx.lambda_admissible)
