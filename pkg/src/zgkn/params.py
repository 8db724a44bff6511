"""Physical parameters, winding-number targets and the hydrogenic dictionary.

Units are m = hbar = c = 1 throughout: the ring radius ``a`` is measured in
Compton wavelengths and energies are fractions of the rest energy.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

#: Sommerfeld fine-structure constant used to convert a charge number Z to
#: the coupling gamma = -Z * ALPHA_S.
ALPHA_S = 0.0072973525693

#: Largest ring radius covered by the existence/uniqueness theorem.
A_MAX = 1.0 - 1.0 / math.sqrt(2.0)
#: Most negative coupling covered by the existence/uniqueness theorem.
GAMMA_MIN = -0.5

_ORBITAL_LETTERS = "spdfghik"


class InadmissibleError(ValueError):
    """Raised when a winding target cannot correspond to a bound state."""


def is_half_integer(value: float) -> bool:
    twice = 2.0 * value
    return abs(twice - round(twice)) < 1e-12 and int(round(twice)) % 2 != 0


def sgn(x: float) -> int:
    return (x > 0) - (x < 0)


@dataclass(frozen=True)
class ModelParams:
    """Ring radius ``a``, coupling ``gamma`` (< 0) and azimuthal ``kappa``."""

    a: float
    gamma: float
    kappa: float

    @classmethod
    def from_charge(cls, a: float, Z: float, kappa: float) -> "ModelParams":
        return cls(a=a, gamma=-Z * ALPHA_S, kappa=kappa)

    @property
    def Z(self) -> float:
        return -self.gamma / ALPHA_S

    @property
    def in_guaranteed_region(self) -> bool:
        return 0.0 < self.a < A_MAX and GAMMA_MIN < self.gamma < 0.0

    def problems(self) -> list[str]:
        out = []
        if not is_half_integer(self.kappa):
            out.append(f"kappa={self.kappa} is not a half-integer")
        if not self.a > 0.0:
            out.append(f"a={self.a} must be positive")
        if not self.gamma < 0.0:
            out.append(f"gamma={self.gamma} must be negative")
        return out


@dataclass(frozen=True)
class WindingTarget:
    n_theta: int
    n_omega: int

    @property
    def admissible(self) -> bool:
        if self.n_theta >= 0:
            return self.n_omega >= 0
        return self.n_omega >= 1

    @property
    def N(self) -> int:
        """Index of the a -> 0 angular eigenvalue this winding corresponds to."""
        return self.n_theta + 1 if self.n_theta >= 0 else self.n_theta


@dataclass(frozen=True)
class AdmissibilityReport:
    accepted: bool
    in_guaranteed_region: bool
    reasons: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "accepted": self.accepted,
            "in_guaranteed_region": self.in_guaranteed_region,
            "reasons": list(self.reasons),
        }


def validate(params: ModelParams, target: WindingTarget) -> AdmissibilityReport:
    """Accept or reject a (parameters, winding target) pair.

    Parameters outside the guaranteed region are accepted but flagged; the
    solver still runs there.
    """
    reasons = params.problems()
    if not target.admissible:
        if target.n_theta >= 0:
            reasons.append("for n_theta >= 0 need n_omega >= 0")
        else:
            reasons.append("for n_theta <= -1 need n_omega >= 1")
    region = not reasons and params.in_guaranteed_region
    if not reasons and not region:
        reasons.append("outside guaranteed region (a < 1 - 1/sqrt(2), -1/2 < gamma < 0)")
    return AdmissibilityReport(
        accepted=not params.problems() and target.admissible,
        in_guaranteed_region=region,
        reasons=reasons,
    )


@dataclass(frozen=True)
class SpectroLabel:
    n: int
    ell: int
    j: Fraction
    m_j: Fraction
    k: int
    M: int

    @property
    def notation(self) -> str:
        letter = _ORBITAL_LETTERS[self.ell] if self.ell < len(_ORBITAL_LETTERS) else f"[l={self.ell}]"
        return f"{self.n}{letter}_{self.j.numerator}/{self.j.denominator}"

    def __str__(self) -> str:
        sign = "+" if self.m_j > 0 else "-"
        mj = abs(self.m_j)
        return f"{self.notation} m_j={sign}{mj.numerator}/{mj.denominator}"

    def to_winding(self) -> tuple[int, int]:
        """Invert the dictionary back to (n_theta, n_omega)."""
        kappa = float(self.m_j)
        # k = -N - sgn(N)(|kappa| - 1/2), so sgn(N) = -sgn(k)
        s = -sgn(self.k)
        N = s * (abs(self.k) - (abs(kappa) - 0.5))
        N = int(round(N))
        n_theta = N - 1 if N >= 1 else N
        return n_theta, self.M


def spin_orbit_k(N: int, kappa: float) -> int:
    """Spin-orbit quantum number attached to angular index N and azimuthal kappa."""
    if N == 0:
        raise ValueError("angular index N must be nonzero")
    return int(round(-N - sgn(N) * (abs(kappa) - 0.5)))


def spectroscopic_label(target: WindingTarget, kappa: float) -> SpectroLabel:
    if not target.admissible:
        raise InadmissibleError(f"winding pair {target} cannot carry a bound state")
    if not is_half_integer(kappa):
        raise InadmissibleError(f"kappa={kappa} is not a half-integer")
    N = target.N
    k = spin_orbit_k(N, kappa)
    M = target.n_omega
    if k > 0 and M == 0:
        raise InadmissibleError("k > 0 with M = 0 has no hydrogenic counterpart")
    j = Fraction(2 * abs(k) - 1, 2)
    ell = int(j + Fraction(sgn(k), 2))
    return SpectroLabel(n=M + abs(k), ell=ell, j=j, m_j=Fraction(int(round(2 * kappa)), 2), k=k, M=M)
