"""Shooting engine for flows on a finite cylinder [x-, x+] x S^1.

A field is an autonomous planar system

    dx/dtau = f(x),    dy/dtau = g(x, y; mu)

with f vanishing exactly at the two boundary circles and two equilibria on
each circle (a source/saddle pair on the left, a saddle/sink pair on the
right). The unstable manifold of the left saddle is followed on the
universal cover (the angle y is never reduced mod 2 pi); where it lands on
the right boundary defines an integer winding number, and parameter values
at which the winding jumps are saddle connectors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from . import _dopri

TWO_PI = 2.0 * math.pi
RTOL = 1e-10
ATOL = 1e-12
LAUNCH_OFFSET = 1e-6
TERMINAL_BAND = 1e-3
MAX_STEPS = 2_000_000


class IntegrationError(RuntimeError):
    """Integration stopped early; ``last`` holds the last good (tau, x, y)."""

    def __init__(self, message: str, last: tuple[float, float, float]):
        super().__init__(f"{message} (last good sample tau={last[0]:.6g}, x={last[1]:.6g}, y={last[2]:.6g})")
        self.last = last


class ConnectorError(RuntimeError):
    pass


class NoJumpError(ConnectorError):
    pass


@dataclass(frozen=True)
class Equilibria:
    """Boundary equilibrium angles, identified with the fundamental domain."""

    n_minus: float
    s_minus: float
    s_plus: float
    n_plus: float


@dataclass(frozen=True)
class Terminal:
    """Where an orbit ends up: an equilibrium copy ``angle -/+ 2 pi shift``.

    ``side`` is "right" for forward orbits (lift = angle - 2 pi shift) and
    "left" for backward orbits (lift = angle + 2 pi shift).
    """

    side: str
    kind: str
    shift: int
    distance: float


@dataclass(frozen=True)
class Orbit:
    tau: np.ndarray
    x: np.ndarray
    y: np.ndarray
    dx: np.ndarray
    dy: np.ndarray
    terminal: Optional[Terminal] = None
    launch_shift: int = 0

    def __len__(self) -> int:
        return len(self.tau)

    @property
    def samples(self) -> np.ndarray:
        return np.column_stack([self.tau, self.x, self.y])

    def y_at_tau(self, tau) -> np.ndarray:
        spline = CubicHermiteSpline(self.tau, self.y, self.dy)
        return spline(tau)

    def x_at_tau(self, tau) -> np.ndarray:
        spline = CubicHermiteSpline(self.tau, self.x, self.dx)
        return spline(tau)

    def y_at_x(self, x) -> np.ndarray:
        """Lift as a function of the axis coordinate (x is monotone)."""
        slope = self.dy / self.dx
        spline = CubicHermiteSpline(self.x, self.y, slope)
        return spline(x)


@dataclass(frozen=True)
class CylinderField:
    """Description of a one-parameter family of cylinder flows.

    ``orientation`` is +1 when the winding is nondecreasing in ``mu`` (the
    textbook case dg/dmu <= 0) and -1 when it is nonincreasing. Optional
    hooks let concrete systems plug in a compiled kernel, a closed-form time
    parameterization or an entirely different shooting routine.
    """

    x_minus: float
    x_plus: float
    f: Callable[[float], float]
    g: Callable[[float, float, float], float]
    y0: float
    equilibria: Callable[[float], Equilibria]
    orientation: int = 1
    name: str = "field"
    kernel: object = None
    kernel_params: Optional[Callable[[float], np.ndarray]] = None
    tau_of_x: Optional[Callable[[float], float]] = None
    x_of_tau: Optional[Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]] = None
    unstable_slope: Optional[Callable[[float], float]] = None
    stable_slope: Optional[Callable[[float], float]] = None
    shooter: Optional[Callable[[float], Orbit]] = None
    stable_shooter: Optional[Callable[[float, int], Orbit]] = None
    terminal_estimate: Optional[Callable[[Orbit, Orbit, float], float]] = None
    span: float = 60.0
    offset: float = LAUNCH_OFFSET
    band: float = TERMINAL_BAND
    attest_heteroclinic: bool = False
    meta: dict = dc_field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class ConnectorResult:
    mu_star: float
    orbit: Orbit
    winding: int
    bracket: tuple[float, float]
    iterations: int
    terminal_lift: float = math.nan
    upper_orbit: Optional[Orbit] = None


# ---------------------------------------------------------------------------
# linearization


def _jacobian(field: CylinderField, x: float, y: float, mu: float) -> tuple[float, float, float]:
    """(f'(x), dg/dx, dg/dy) by one-sided/central differences."""
    h = 1e-6 * max(1.0, field.x_plus - field.x_minus)
    if x - h < field.x_minus:
        fp = (field.f(x + h) - field.f(x)) / h
        gx = (field.g(x + h, y, mu) - field.g(x, y, mu)) / h
    elif x + h > field.x_plus:
        fp = (field.f(x) - field.f(x - h)) / h
        gx = (field.g(x, y, mu) - field.g(x - h, y, mu)) / h
    else:
        fp = (field.f(x + h) - field.f(x - h)) / (2 * h)
        gx = (field.g(x + h, y, mu) - field.g(x - h, y, mu)) / (2 * h)
    hy = 1e-6
    gy = (field.g(x, y + hy, mu) - field.g(x, y - hy, mu)) / (2 * hy)
    return fp, gx, gy


def _eigen_slope(fp: float, gx: float, gy: float) -> float:
    # eigenvector (1, c) for the eigenvalue f'(x) of [[f', 0], [gx, gy]];
    # f' = 0 gives the center direction of a saddle-node
    return gx / (fp - gy)


def launch_slope(field: CylinderField, mu: float, side: str = "left") -> float:
    eq = field.equilibria(mu)
    if side == "left":
        if field.unstable_slope is not None:
            return field.unstable_slope(mu)
        return _eigen_slope(*_jacobian(field, field.x_minus, eq.s_minus, mu))
    if field.stable_slope is not None:
        return field.stable_slope(mu)
    return _eigen_slope(*_jacobian(field, field.x_plus, eq.s_plus, mu))


# ---------------------------------------------------------------------------
# integration


def _run(field: CylinderField, mu: float, x0: float, y0: float, t0: float, t1: float) -> Orbit:
    if field.kernel is not None:
        p = np.asarray(field.kernel_params(mu), dtype=float)
        buf, status = _dopri.dopri(field.kernel, t0, x0, y0, t1, p, RTOL, ATOL, 0.0, MAX_STEPS)
        last = (buf[0, -1], buf[1, -1], buf[2, -1])
        if status == _dopri.STEP_UNDERFLOW:
            raise IntegrationError("step size underflow", last)
        if status == _dopri.NON_FINITE:
            raise IntegrationError("non-finite state", last)
        if status == _dopri.MAX_STEPS:
            raise IntegrationError("step budget exhausted", last)
        t, x, y, dx, dy = buf
    else:
        def rhs(t, s):
            return [field.f(s[0]), field.g(s[0], s[1], mu)]

        sol = solve_ivp(rhs, (t0, t1), [x0, y0], method="RK45", rtol=RTOL, atol=ATOL)
        if not sol.success or not np.all(np.isfinite(sol.y)):
            good = np.all(np.isfinite(sol.y), axis=0)
            i = int(np.nonzero(good)[0][-1]) if good.any() else 0
            raise IntegrationError(sol.message, (sol.t[i], sol.y[0, i], sol.y[1, i]))
        t, (x, y) = sol.t, sol.y
        dx = np.array([field.f(v) for v in x])
        dy = np.array([field.g(u, v, mu) for u, v in zip(x, y)])
    if field.x_of_tau is not None:
        # closed-form axis motion: removes round-off drift near the boundary
        x, dx = field.x_of_tau(t)
    if t1 < t0:
        t, x, y, dx, dy = t[::-1], x[::-1], y[::-1], dx[::-1], dy[::-1]
    return Orbit(np.ascontiguousarray(t), np.ascontiguousarray(x), np.ascontiguousarray(y),
                 np.ascontiguousarray(dx), np.ascontiguousarray(dy))


def _snap(value: float, candidates: dict[str, float], sign: int) -> tuple[str, int, float]:
    """Nearest lift ``angle + sign * 2 pi k`` among the candidate angles."""
    best = None
    for kind, angle in candidates.items():
        k = round(sign * (value - angle) / TWO_PI)
        d = abs(value - (angle + sign * TWO_PI * k))
        if best is None or d < best[2]:
            best = (kind, int(k), d)
    return best


def classify(orbit: Orbit, field: CylinderField, mu: float, side: str = "right") -> Optional[Terminal]:
    eq = field.equilibria(mu)
    if side == "right":
        if field.x_plus - orbit.x[-1] > field.band:
            return None
        kind, k, d = _snap(orbit.y[-1], {"N+": eq.n_plus, "S+": eq.s_plus}, -1)
    else:
        if orbit.x[0] - field.x_minus > field.band:
            return None
        kind, k, d = _snap(orbit.y[0], {"N-": eq.n_minus, "S-": eq.s_minus}, +1)
    return Terminal(side, kind, k, d)


def integrate_unstable(field: CylinderField, mu: float, offset: Optional[float] = None,
                       span: Optional[float] = None, direction: Optional[tuple[float, float]] = None) -> Orbit:
    """Follow the unstable manifold of the left saddle S-(mu) forward in tau.

    The orbit starts ``offset`` away from the saddle along ``direction``
    (default: the unit eigenvector of the launch eigenvalue) and runs for
    ``span`` units of tau, or is delegated to the field's own shooter.
    """
    offset = field.offset if offset is None else offset
    if not offset > 0.0:
        raise ValueError("launch offset must be positive; the saddle itself is a fixed point")
    if field.shooter is not None and direction is None and offset == field.offset and span is None:
        orbit = field.shooter(mu)
    else:
        span = field.span if span is None else span
        eq = field.equilibria(mu)
        if direction is None:
            b = launch_slope(field, mu, "left")
            direction = (1.0, b)
        nrm = math.hypot(*direction)
        ux, uy = direction[0] / nrm, direction[1] / nrm
        if ux <= 0.0:
            raise ValueError("launch direction must point into the cylinder")
        x0, y0 = field.x_minus + offset * ux, eq.s_minus + offset * uy
        t0 = field.tau_of_x(x0) if field.tau_of_x is not None else 0.0
        orbit = _run(field, mu, x0, y0, t0, t0 + span)
    term = classify(orbit, field, mu, "right")
    return Orbit(orbit.tau, orbit.x, orbit.y, orbit.dx, orbit.dy, term, 0)


def integrate_stable(field: CylinderField, mu: float, shift: int = 0, offset: Optional[float] = None,
                     span: Optional[float] = None) -> Orbit:
    """Stable manifold of the right saddle copy S+ - 2 pi shift, integrated backward.

    Samples are returned in increasing tau (and x) order.
    """
    offset = field.offset if offset is None else offset
    if not offset > 0.0:
        raise ValueError("launch offset must be positive")
    if field.stable_shooter is not None and offset == field.offset and span is None:
        orbit = field.stable_shooter(mu, shift)
    else:
        span = field.span if span is None else span
        eq = field.equilibria(mu)
        c = launch_slope(field, mu, "right")
        nrm = math.hypot(1.0, c)
        x0 = field.x_plus - offset / nrm
        y0 = eq.s_plus - TWO_PI * shift - offset * c / nrm
        t0 = field.tau_of_x(x0) if field.tau_of_x is not None else 0.0
        orbit = _run(field, mu, x0, y0, t0, t0 - span)
    term = classify(orbit, field, mu, "left")
    return Orbit(orbit.tau, orbit.x, orbit.y, orbit.dx, orbit.dy, term, shift)


def winding_of(orbit: Orbit, field: Optional[CylinderField] = None) -> int:
    """Winding number read off the orbit's terminal classification.

    Forward orbits end at ``angle - 2 pi w``; backward orbits launched at the
    right copy ``s+ - 2 pi m`` start from ``angle + 2 pi j`` and have
    winding ``m + j``.
    """
    t = orbit.terminal
    if t is None:
        raise ValueError("orbit has no terminal classification")
    if t.side == "right":
        return t.shift
    return orbit.launch_shift + t.shift


def winding(field: CylinderField, mu: float) -> int:
    orbit = integrate_unstable(field, mu)
    if orbit.terminal is None:
        raise ConnectorError(f"orbit at mu={mu!r} did not reach the right boundary")
    return orbit.terminal.shift


# ---------------------------------------------------------------------------
# connector search


def _default_terminal_estimate(field: CylinderField, lower: Orbit, upper: Orbit, mu: float,
                               split: float = 1e-6) -> float:
    """Extrapolated terminal lift of the connector bracketed by two orbits.

    Both orbits shadow the connector until they split apart near the right
    saddle. The last shared point is carried to the boundary along the
    stable eigendirection of S+.
    """
    t0, t1 = max(lower.tau[0], upper.tau[0]), min(lower.tau[-1], upper.tau[-1])
    mask = (lower.tau >= t0) & (lower.tau <= t1)
    taus = lower.tau[mask]
    ylo = lower.y[mask]
    gap = np.abs(upper.y_at_tau(taus) - ylo)
    apart = np.nonzero(gap > split)[0]
    i = (apart[0] - 1) if apart.size else len(taus) - 1
    i = max(i, 0)
    x = lower.x[mask][i]
    c = launch_slope(field, mu, "right")
    return float(ylo[i] + c * (field.x_plus - x))


def find_connector(field: CylinderField, target: int, bracket: tuple[float, float], tol: float = 1e-9,
                   max_iter: Optional[int] = None) -> ConnectorResult:
    """Bisect for the parameter where the winding steps from ``target`` to ``target + 1``."""
    lo, hi = float(min(bracket)), float(max(bracket))
    if not hi > lo:
        raise ValueError("bracket must have positive width")
    if not tol > 0.0:
        raise ValueError("tol must be positive")
    # 'a' is the end where the winding is low, 'b' where it is high
    a, b = (lo, hi) if field.orientation > 0 else (hi, lo)
    orb_a = integrate_unstable(field, a)
    orb_b = integrate_unstable(field, b)
    for orb, mu in ((orb_a, a), (orb_b, b)):
        if orb.terminal is None:
            raise ConnectorError(f"orbit at mu={mu!r} did not reach the right boundary")
    wa, wb = orb_a.terminal.shift, orb_b.terminal.shift
    if wa > target or wb < target + 1:
        raise NoJumpError(
            f"no jump in bracket: winding {wa} at mu={a!r}, {wb} at mu={b!r}, target {target}")
    budget = math.ceil(math.log2((hi - lo) / tol)) + 2 if hi - lo > tol else 0
    if max_iter is not None:
        budget = min(budget, max_iter)
    it = 0
    while abs(b - a) > tol:
        if it >= budget:
            raise ConnectorError(f"bisection budget of {budget} iterations exhausted")
        m = 0.5 * (a + b)
        orb = integrate_unstable(field, m)
        if orb.terminal is None:
            raise ConnectorError(f"orbit at mu={m!r} did not reach the right boundary")
        if orb.terminal.shift >= target + 1:
            b, orb_b = m, orb
        else:
            a, orb_a = m, orb
        it += 1
    w = orb_a.terminal.shift
    if w != target:
        raise ConnectorError(f"winding jumped past the target: {w} -> {orb_b.terminal.shift}")
    mu_star = 0.5 * (a + b)
    if field.terminal_estimate is not None:
        lift = field.terminal_estimate(orb_a, orb_b, mu_star)
    else:
        lift = _default_terminal_estimate(field, orb_a, orb_b, mu_star)
    return ConnectorResult(mu_star=mu_star, orbit=orb_a, winding=w, bracket=(min(a, b), max(a, b)),
                           iterations=it, terminal_lift=lift, upper_orbit=orb_b)


def signed_area(field: CylinderField, mu: float, target: int, n: int = 4001) -> float:
    """Green's-theorem area between the unstable orbit of S- and the stable orbit of S+ - 2 pi target.

    The sign is taken in the orientation-normalized parameter: negative on the
    low-winding side of the connector, positive on the high side.
    """
    lower = integrate_unstable(field, mu)
    upper = integrate_stable(field, mu, target)
    x0 = max(lower.x[0], upper.x[0])
    x1 = min(lower.x[-1], upper.x[-1])
    if not x1 > x0:
        raise ValueError("orbits do not overlap in x")
    xs = np.union1d(lower.x[(lower.x >= x0) & (lower.x <= x1)], upper.x[(upper.x >= x0) & (upper.x <= x1)])
    xs = np.union1d(xs, np.linspace(x0, x1, n))
    diff = _lift_at_x(upper, xs) - _lift_at_x(lower, xs)
    return float(np.trapezoid(diff, xs))


def _lift_at_x(orbit: Orbit, xs: np.ndarray) -> np.ndarray:
    """Hermite lift y(x) where the samples are strictly increasing in x, linear elsewhere."""
    x = orbit.x
    keep = np.concatenate([[True], x[1:] > np.maximum.accumulate(x)[:-1]]) & (orbit.dx > 0)
    if keep.sum() < 2:
        return np.interp(xs, orbit.x, orbit.y)
    o = Orbit(orbit.tau[keep], orbit.x[keep], orbit.y[keep], orbit.dx[keep], orbit.dy[keep])
    return o.y_at_x(xs)


# ---------------------------------------------------------------------------
# assumption checks


@dataclass
class AssumptionReport:
    results: dict[str, bool]
    witnesses: dict[str, object]

    @property
    def all_checked_pass(self) -> bool:
        return all(v for k, v in self.results.items() if k != "e")

    def to_dict(self) -> dict:
        return {"results": dict(self.results), "witnesses": {k: _jsonable(v) for k, v in self.witnesses.items()}}


def _jsonable(v):
    if isinstance(v, (list, tuple)):
        return [_jsonable(u) for u in v]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def _boundary_roots(field: CylinderField, x: float, mu: float, ny: int) -> list[float]:
    # half-step offset keeps equilibria on the fundamental-domain edge off the grid nodes
    ys = field.y0 + TWO_PI * (np.arange(ny + 1) + 0.5) / ny
    vals = np.array([field.g(x, y, mu) for y in ys])
    roots = []
    for i in range(ny):
        if vals[i] == 0.0:
            roots.append(float(ys[i]))
        elif vals[i] * vals[i + 1] < 0.0:
            roots.append(brentq(lambda y: field.g(x, y, mu), ys[i], ys[i + 1], xtol=1e-14))
    return roots


def check_assumptions(field: CylinderField, mus, nx: int = 201, ny: int = 720) -> AssumptionReport:
    """Sample-based checks of the structural assumptions (a)-(d).

    (e) cannot be checked pointwise; it is reported as attested when the
    field was built under hypotheses that imply it.
    """
    mus = np.atleast_1d(np.asarray(mus, dtype=float))
    res: dict[str, bool] = {}
    wit: dict[str, object] = {}

    # (a) f vanishes at the ends, positive inside
    xs = np.linspace(field.x_minus, field.x_plus, nx)
    fv = np.array([field.f(x) for x in xs])
    bad = []
    if abs(fv[0]) > 1e-12:
        bad.append(float(xs[0]))
    if abs(fv[-1]) > 1e-12:
        bad.append(float(xs[-1]))
    bad += [float(x) for x, v in zip(xs[1:-1], fv[1:-1]) if not v > 0.0]
    res["a"] = not bad
    wit["a"] = bad[:5]

    # (b) two equilibria per boundary with the prescribed stability signs,
    # (c) their ordering in the fundamental domain
    ok_b, ok_c, wb, wc = True, True, [], []
    for mu in mus:
        eq = field.equilibria(mu)
        for x, names, signs in ((field.x_minus, ("n_minus", "s_minus"), (1, -1)),
                                (field.x_plus, ("s_plus", "n_plus"), (1, -1))):
            roots = _boundary_roots(field, x, mu, ny)
            if len(roots) != 2:
                ok_b = False
                wb.append({"mu": float(mu), "x": float(x), "roots": roots})
                continue
            for name, sign in zip(names, signs):
                y = getattr(eq, name)
                if min(abs((r - y + math.pi) % TWO_PI - math.pi) for r in roots) > 1e-7:
                    ok_b = False
                    wb.append({"mu": float(mu), "missing": name, "roots": roots})
                _, _, gy = _jacobian(field, x, y, mu)
                if sign * gy <= 0.0:
                    ok_b = False
                    wb.append({"mu": float(mu), "equilibrium": name, "dg_dy": gy})
        top = field.y0 + TWO_PI
        if not (field.y0 <= eq.n_minus < eq.s_minus < top and field.y0 <= eq.s_plus < eq.n_plus < top):
            ok_c = False
            wc.append({"mu": float(mu), "equilibria": [eq.n_minus, eq.s_minus, eq.s_plus, eq.n_plus]})
    res["b"], res["c"] = ok_b, ok_c
    wit["b"], wit["c"] = wb[:5], wc[:5]

    # (d) g is monotone in the orientation-normalized parameter
    worst = -math.inf
    where = None
    ygrid = field.y0 + TWO_PI * np.arange(ny // 4) / (ny // 4)
    for mu in mus:
        h = 1e-6 * max(1.0, abs(mu))
        for x in xs[:: max(1, nx // 50)]:
            for y in ygrid:
                d = field.orientation * (field.g(x, y, mu + h) - field.g(x, y, mu - h)) / (2 * h)
                if d > worst:
                    worst, where = d, (float(x), float(y), float(mu))
    res["d"] = worst <= 1e-9
    wit["d"] = {"max_dg_dmu": worst, "at": where}

    res["e"] = bool(field.attest_heteroclinic)
    wit["e"] = ("guaranteed by the connector-existence theorem hypotheses" if field.attest_heteroclinic
                else "not attested for this parameter set")
    return AssumptionReport(res, wit)
