"""Joint solve for (E, lambda): alternate the two connector searches.

phi(E) = E_{N_Omega}(lambda_{N_Theta}(E)) is a contraction on [0, 1] in the
guaranteed parameter region, so plain fixed-point iteration converges.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

from .cylinder import ConnectorError, ConnectorResult, IntegrationError
from .omega_system import E_CEIL, E_FLOOR, OmegaContext, find_E
from .oracles import SommerfeldIndex, a0_angular_k, sommerfeld_energy
from .params import InadmissibleError, ModelParams, SpectroLabel, WindingTarget, spectroscopic_label, validate
from .theta_system import ThetaContext, find_lambda, lambda_bracket, bracket_index

log = logging.getLogger(__name__)

OUTER_TOL = 1e-8
INNER_TOL = 1e-9


class NonConvergenceError(RuntimeError):
    def __init__(self, message: str, state: "BoundState"):
        super().__init__(message)
        self.state = state


@dataclass(frozen=True)
class BoundState:
    E: float
    lam: float
    params: ModelParams
    target: WindingTarget
    label: SpectroLabel
    iterations: int
    dE: float
    dlam: float
    in_region: bool
    converged: bool = True
    contraction: float = math.nan
    theta: Optional[ConnectorResult] = field(default=None, repr=False, compare=False)
    omega: Optional[ConnectorResult] = field(default=None, repr=False, compare=False)

    @property
    def reflected_E(self) -> float:
        """Energy of the negative-energy partner (the spectrum is symmetric about 0)."""
        return -self.E

    def to_dict(self) -> dict:
        return {
            "E": self.E,
            "lambda": self.lam,
            "a": self.params.a,
            "gamma": self.params.gamma,
            "kappa": self.params.kappa,
            "n_theta": self.target.n_theta,
            "n_omega": self.target.n_omega,
            "label": str(self.label),
            "iterations": self.iterations,
            "residual_E": self.dE,
            "residual_lambda": self.dlam,
            "contraction": self.contraction,
            "converged": self.converged,
            "in_guaranteed_region": self.in_region,
            "reflected_E": self.reflected_E,
        }


def initial_energy(params: ModelParams, target: WindingTarget) -> float:
    k = a0_angular_k(bracket_index(target.n_theta), params.kappa)
    if abs(params.gamma) < 1 and k * k > params.gamma ** 2:
        try:
            return sommerfeld_energy(SommerfeldIndex(target.n_omega, k, params.gamma))
        except InadmissibleError:
            pass
    return 0.5


def _widen(bracket: tuple[float, float], factor: float) -> tuple[float, float]:
    c, h = 0.5 * (bracket[0] + bracket[1]), 0.5 * (bracket[1] - bracket[0])
    return c - factor * h, c + factor * h


def _lambda_of(params, n_theta, E, tol, widen):
    ctx = ThetaContext(params, min(max(E, 0.0), 1.0))
    br = lambda_bracket(ctx, n_theta)
    if widen:
        br = _widen(br, 2.0)
    return find_lambda(ctx, n_theta, tol, br)


def _energy_of(params, n_omega, lam, tol, widen):
    ctx = OmegaContext(params, lam)
    br = (E_FLOOR * 1e-3, 1 - (1 - E_CEIL) * 1e-3) if widen else (E_FLOOR, E_CEIL)
    return find_E(ctx, n_omega, tol, br)


def solve_pair(params: ModelParams, target: WindingTarget, tol: float = OUTER_TOL, max_iter: int = 100,
               inner_tol: float = INNER_TOL, E0: Optional[float] = None) -> BoundState:
    """Fixed-point iteration E <- E_{N_Omega}(lambda_{N_Theta}(E))."""
    report = validate(params, target)
    if not report.accepted:
        raise InadmissibleError("; ".join(report.reasons))
    label = spectroscopic_label(target, params.kappa)
    region = report.in_guaranteed_region
    try:
        return _iterate(params, target, tol, max_iter, inner_tol, E0, label, region, widen=False)
    except (ConnectorError, IntegrationError) as exc:
        if region:
            raise
        log.warning("inner search failed outside the guaranteed region (%s); retrying with wider brackets", exc)
        return _iterate(params, target, tol, max_iter, inner_tol, E0, label, region, widen=True)


def _iterate(params, target, tol, max_iter, inner_tol, E0, label, region, widen) -> BoundState:
    E = initial_energy(params, target) if E0 is None else E0
    steps: list[float] = []
    lam_prev = math.nan
    th = om = None
    for it in range(1, max_iter + 1):
        th = _lambda_of(params, target.n_theta, E, inner_tol, widen)
        om = _energy_of(params, target.n_omega, th.mu_star, inner_tol, widen)
        dE = abs(om.mu_star - E)
        steps.append(dE)
        E_prev, E = E, om.mu_star
        if dE <= tol:
            lam_prev = th.mu_star
            th = _lambda_of(params, target.n_theta, E, inner_tol, widen)
            ratio = _ratio(steps)
            return BoundState(E=E, lam=th.mu_star, params=params, target=target, label=label, iterations=it,
                              dE=dE, dlam=abs(th.mu_star - lam_prev), in_region=region, converged=True,
                              contraction=ratio, theta=th, omega=om)
    state = BoundState(E=E, lam=th.mu_star, params=params, target=target, label=label, iterations=max_iter,
                       dE=steps[-1], dlam=math.nan, in_region=region, converged=False, contraction=_ratio(steps),
                       theta=th, omega=om)
    raise NonConvergenceError(f"no convergence in {max_iter} iterations (last |dE|={steps[-1]:.3g})", state)


def _ratio(steps: list[float]) -> float:
    ratios = [b / a for a, b in zip(steps, steps[1:]) if a > 0]
    return max(ratios) if ratios else math.nan


def phi(params: ModelParams, target: WindingTarget, E: float, inner_tol: float = 1e-12) -> float:
    lam = _lambda_of(params, target.n_theta, E, inner_tol, False).mu_star
    return _energy_of(params, target.n_omega, lam, inner_tol, False).mu_star


def contraction_probe(params: ModelParams, target: WindingTarget, E_probe: float, delta: float,
                      inner_tol: float = 1e-12) -> float:
    """Finite-difference slope |phi(E + delta) - phi(E)| / delta of the fixed-point map."""
    if delta == 0:
        raise ValueError("delta must be nonzero")
    for E in (E_probe, E_probe + delta):
        if not 0.0 < E < 1.0:
            raise ValueError(f"probe energy {E} outside (0, 1)")
    return abs(phi(params, target, E_probe + delta, inner_tol) - phi(params, target, E_probe, inner_tol)) / abs(delta)
