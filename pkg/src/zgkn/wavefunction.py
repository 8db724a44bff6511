"""Amplitudes R(r), S(theta) and the density 2 R^2 S^2 of a solved bound state.

Given the phases, the amplitudes follow by quadrature:

    d ln R / dr     = (r/w) sin Omega - (lambda/w) cos Omega,   w = sqrt(r^2 + a^2)
    d ln S / dtheta = -a cos theta sin Theta - (aE sin theta - kappa / sin theta) cos Theta.

Each phase is assembled from the forward orbit out of the left equilibrium
and the backward orbit into the right one, joined where they agree best, so
both tails follow the decaying solution. Quadratures run in smooth
coordinates: r = s sinh(u) radially and theta = 2 atan(exp(tau)) angularly,
where the angular equation loses its poles.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import cumulative_simpson, simpson

from .cylinder import Orbit, integrate_stable, integrate_unstable
from .omega_system import OmegaContext, shoot, shoot_stable
from .solver import BoundState
from .theta_system import ThetaContext, saddle_data, theta_field

ANGULAR_SPAN = 14.0


@dataclass(frozen=True)
class WaveProfile:
    r: np.ndarray
    R: np.ndarray
    Omega: np.ndarray
    theta: np.ndarray
    S: np.ndarray
    Theta: np.ndarray
    density: np.ndarray  # 2 R^2 S(pi/2)^2 on the r grid
    norm: float  # 1 / sqrt(radial integral * angular integral) of the raw amplitudes
    radial_integral: float
    angular_integral: float
    E: float
    lam: float

    @property
    def r_peak(self) -> float:
        return float(self.r[np.argmax(self.density)])


def _splice(lower: Orbit, upper: Orbit, key: str) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """Join two orbits (sharing the coordinate ``key``) at the point of closest agreement."""
    tl, tu = getattr(lower, key), getattr(upper, key)
    lo, hi = max(tl[0], tu[0]), min(tl[-1], tu[-1])
    if not hi > lo:
        raise ValueError("orbits do not overlap")
    mask = (tl >= lo) & (tl <= hi)
    cand = tl[mask]
    gap = np.abs(np.interp(cand, tu, upper.y) - lower.y[mask])
    # ignore the launch neighbourhoods where either orbit has not settled
    inner = (cand > lo + 0.05 * (hi - lo)) & (cand < hi - 0.05 * (hi - lo))
    if inner.any():
        gap = np.where(inner, gap, np.inf)
    tm = float(cand[np.argmin(gap)])
    keep_l, keep_u = tl <= tm, tu > tm
    t = np.concatenate([tl[keep_l], tu[keep_u]])
    y = np.concatenate([lower.y[keep_l], upper.y[keep_u]])
    dy = np.concatenate([lower.dy[keep_l], upper.dy[keep_u]])
    return t, y, dy, tm


@dataclass(frozen=True)
class Phase:
    """A spliced phase: Hermite interpolant plus the orbit's own step points."""

    spline: Callable
    knots: np.ndarray
    outside: Callable | None = None

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = self.spline(np.clip(t, self.knots[0], self.knots[-1]))
        if self.outside is not None:
            out = self.outside(t, out)
        return out


def _hermite(t: np.ndarray, y: np.ndarray, dy: np.ndarray):
    from scipy.interpolate import CubicHermiteSpline

    return CubicHermiteSpline(t, y, dy)


def radial_phase(state: BoundState) -> Phase:
    """Omega as a function of r for the solved state."""
    ctx = OmegaContext(state.params, state.lam)
    lower = shoot(ctx, state.E)
    upper = shoot_stable(ctx, state.E, state.target.n_omega)
    a = state.params.a
    t, y, dy, _ = _splice(lower, upper, "tau")
    r = t * a
    return Phase(_hermite(r, y, dy / a), r)


def angular_phase(state: BoundState) -> Phase:
    """Theta as a function of tau (theta = 2 atan(exp(tau)))."""
    ctx = ThetaContext(state.params, state.E)
    fld = theta_field(ctx)
    lower = integrate_unstable(fld, state.lam)
    upper = integrate_stable(fld, state.lam, state.target.n_theta)
    t, y, dy, _ = _splice(lower, upper, "tau")
    sd = saddle_data(ctx, state.lam)
    s_minus, s_plus = sd.s_minus[1], sd.s_plus[1] - 2 * math.pi * state.target.n_theta
    t0, t1 = t[0], t[-1]

    def outside(tau, out):
        # beyond the integrated range follow the launch eigendirections
        th = 2 * np.arctan(np.exp(tau))
        out = np.where(tau < t0, s_minus + sd.slope * th, out)
        return np.where(tau > t1, s_plus + sd.slope * (th - math.pi), out)

    return Phase(_hermite(t, y, dy), t, outside)


def _quadrature_nodes(knots: np.ndarray, grid: np.ndarray, sub: int = 8) -> np.ndarray:
    """Orbit step points, each step split ``sub`` ways, merged with the output grid."""
    k = knots[(knots > grid[0]) & (knots < grid[-1])]
    k = np.concatenate([[grid[0]], k, [grid[-1]]])
    frac = np.arange(sub) / sub
    fine = (k[:-1, None] + np.diff(k)[:, None] * frac[None, :]).ravel()
    nodes = np.union1d(np.append(fine, k[-1]), grid)
    # drop near-duplicates that would make Simpson weights blow up
    keep = np.concatenate([[True], np.diff(nodes) > 1e-12 * max(1.0, abs(nodes[-1]))])
    nodes = nodes[keep]
    return np.union1d(nodes, grid)


def _on_grid(nodes: np.ndarray, values: np.ndarray, grid: np.ndarray) -> np.ndarray:
    return values[np.searchsorted(nodes, grid)]


def radial_grid(state: BoundState, grid: int) -> tuple[np.ndarray, np.ndarray, float]:
    """Symmetric sinh-clustered grid on [-50/eta, 50/eta]; returns (u, r, scale)."""
    if grid < 3:
        raise ValueError("grid needs at least 3 points")
    eta = math.sqrt(1 - state.E ** 2)
    extent = 50.0 / eta
    s = 0.5 * state.params.a
    U = math.asinh(extent / s)
    u = np.linspace(-U, U, grid | 1)
    return u, s * np.sinh(u), s


def integrate_lnR(state: BoundState, phase: Phase, grid: int):
    """ln R (zero at r = 0) on the output grid and on the quadrature nodes.

    Returns ``(r, lnR, Omega, nodes, lnR_nodes)``.
    """
    _, r, _ = radial_grid(state, grid)
    nodes = _quadrature_nodes(phase.knots, r)
    a = state.params.a
    om = phase(nodes)
    w = np.sqrt(nodes * nodes + a * a)
    rate = (nodes / w) * np.sin(om) - (state.lam / w) * np.cos(om)
    lnR = cumulative_simpson(rate, x=nodes, initial=0.0)
    lnR -= lnR[np.searchsorted(nodes, 0.0)]
    return r, _on_grid(nodes, lnR, r), phase(r), nodes, lnR


def angular_grid(grid: int) -> np.ndarray:
    if grid < 3:
        raise ValueError("grid needs at least 3 points")
    return np.linspace(-ANGULAR_SPAN, ANGULAR_SPAN, grid | 1)


def integrate_lnS(state: BoundState, phase: Phase, grid: int):
    """ln S (zero at theta = pi/2) in tau on the output grid and on the quadrature nodes.

    Returns ``(tau, lnS, Theta, nodes, lnS_nodes)``.
    """
    tau = angular_grid(grid)
    nodes = _quadrature_nodes(phase.knots, tau)
    th = 2 * np.arctan(np.exp(nodes))
    Th = phase(nodes)
    a, E, kappa = state.params.a, state.E, state.params.kappa
    st, ct = np.sin(th), np.cos(th)
    # d lnS / dtau = sin(theta) d lnS / dtheta, regular at both poles
    rate = -a * ct * st * np.sin(Th) - (a * E * st * st - kappa) * np.cos(Th)
    lnS = cumulative_simpson(rate, x=nodes, initial=0.0)
    lnS -= lnS[np.searchsorted(nodes, 0.0)]
    return tau, _on_grid(nodes, lnS, tau), phase(tau), nodes, lnS


def _angular_integral(tau: np.ndarray, S: np.ndarray, kappa: float) -> float:
    """Integral of S^2 sin(theta) dtheta = S^2 sin^2(theta) dtau, with power-law tails.

    Near either pole S ~ sin(theta)^|kappa|, so the integrand decays like
    exp(-(2|kappa| + 2)|tau|) and the tails integrate in closed form.
    """
    th = 2 * np.arctan(np.exp(tau))
    f = S * S * np.sin(th) ** 2
    rate = 2 * abs(kappa) + 2
    return float(simpson(f, x=tau) + (f[0] + f[-1]) / rate)


def assemble_density(state: BoundState, r: np.ndarray, lnR: np.ndarray, tau: np.ndarray, lnS: np.ndarray,
                     r_nodes: np.ndarray, lnR_nodes: np.ndarray, tau_nodes: np.ndarray, lnS_nodes: np.ndarray):
    """Normalize the amplitudes and form 2 R^2 S(pi/2)^2 on the radial grid.

    The measure is dr over both sheets times sin(theta) dtheta; integrals
    use the quadrature nodes. Returns (R, S, density, norm, radial, angular).
    """
    if not (np.all(np.isfinite(lnR_nodes)) and np.all(np.isfinite(lnS_nodes))):
        raise FloatingPointError("non-finite amplitude samples")
    radial = float(simpson(np.exp(2 * lnR_nodes), x=r_nodes))
    angular = _angular_integral(tau_nodes, np.exp(lnS_nodes), state.params.kappa)
    R = np.exp(lnR) / math.sqrt(radial)
    S = np.exp(lnS) / math.sqrt(angular)
    s_eq = float(np.exp(lnS_nodes[np.searchsorted(tau_nodes, 0.0)])) / math.sqrt(angular)
    density = 2 * R * R * s_eq * s_eq
    return R, S, density, 1.0 / math.sqrt(radial * angular), radial, angular


def wave_profile(state: BoundState, grid: int = 4001) -> WaveProfile:
    r, lnR, om, rn, lnRn = integrate_lnR(state, radial_phase(state), grid)
    tau, lnS, Th, tn, lnSn = integrate_lnS(state, angular_phase(state), grid)
    R, S, density, norm, radial, angular = assemble_density(state, r, lnR, tau, lnS, rn, lnRn, tn, lnSn)
    theta = 2 * np.arctan(np.exp(tau))
    return WaveProfile(r=r, R=R, Omega=om, theta=theta, S=S, Theta=Th, density=density, norm=norm,
                       radial_integral=radial, angular_integral=angular, E=state.E, lam=state.lam)
