"""Command-line front end.

    zgkn solve | scan | oracle | label | wavefunction | check

Exit codes: 0 success, 1 usage error or inadmissible input, 2 the solver
did not converge.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import oracles
from .cylinder import ConnectorError, IntegrationError, check_assumptions
from .omega_system import OmegaContext, barrier_check, omega_field
from .params import ALPHA_S, InadmissibleError, ModelParams, WindingTarget, spectroscopic_label, validate
from .solver import NonConvergenceError, solve_pair
from .theta_system import ThetaContext, theta_field

WORKERS_ENV = "ZGKN_WORKERS"
log = logging.getLogger("zgkn")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def read_config(path: str) -> dict[str, str]:
    out = {}
    with open(path) as fh:
        for i, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{i}: expected key=value")
            k, v = line.split("=", 1)
            out[k.strip().replace("-", "_")] = v.strip()
    return out


# ---------------------------------------------------------------------------
# argument plumbing


def _add_model(p: argparse.ArgumentParser, targets: bool = True) -> None:
    p.add_argument("--a", type=float, help="ring radius (units hbar/mc)")
    p.add_argument("--gamma", type=float, help="coupling gamma < 0")
    p.add_argument("--Z", type=float, help="charge number; gamma = -Z alpha")
    p.add_argument("--kappa", type=float, help="half-integer azimuthal number")
    if targets:
        p.add_argument("--ntheta", type=int, help="angular winding N_Theta")
        p.add_argument("--nomega", type=int, help="radial winding N_Omega")
    p.add_argument("--config", help="key=value file supplying defaults for these flags")


def _add_solver(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--max-iter", type=int, default=None)


def _add_output(p: argparse.ArgumentParser, default: str = "json") -> None:
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--output", "-o", help="write to this file instead of stdout")
    p.set_defaults(_default_format=default)


def _merge_config(ns: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    """Fill flags that were not given on the command line from --config."""
    if not getattr(ns, "config", None):
        return
    try:
        cfg = read_config(ns.config)
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}")
    actions = {a.dest: a for a in parser._actions}
    explicit_coupling = ns.__dict__.get("gamma") is not None or ns.__dict__.get("Z") is not None
    for key, raw in cfg.items():
        if key not in actions or key in ("config", "help"):
            raise UsageError(f"unknown config key {key!r}")
        if key in ("gamma", "Z") and explicit_coupling:
            continue
        if getattr(ns, key, None) is None:
            conv = actions[key].type or str
            try:
                setattr(ns, key, conv(raw))
            except ValueError:
                raise UsageError(f"bad value for {key}: {raw!r}")


def _coupling(ns) -> float:
    if ns.gamma is not None and ns.Z is not None:
        raise UsageError("--gamma and --Z are mutually exclusive")
    if ns.gamma is not None:
        return ns.gamma
    if ns.Z is not None:
        return -ns.Z * ALPHA_S
    raise UsageError("one of --gamma or --Z is required")


def _need(ns, *names) -> None:
    missing = [n for n in names if getattr(ns, n, None) is None]
    if missing:
        raise UsageError("missing required flags: " + ", ".join("--" + m.replace("_", "-") for m in missing))


def _model(ns) -> ModelParams:
    _need(ns, "a", "kappa")
    return ModelParams(a=ns.a, gamma=_coupling(ns), kappa=ns.kappa)


def _solve_kwargs(ns) -> dict:
    kw = {}
    if getattr(ns, "tol", None) is not None:
        kw["tol"] = ns.tol
    if getattr(ns, "max_iter", None) is not None:
        kw["max_iter"] = ns.max_iter
    return kw


def _emit(text: str, path: Optional[str]) -> None:
    if path:
        try:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc}") from exc
    else:
        sys.stdout.write(text)


def _csv(header: Sequence[str], rows: Sequence[Sequence], comments: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _json(obj) -> str:
    def clean(v):
        if isinstance(v, np.generic):
            v = v.item()
        if isinstance(v, np.ndarray):
            v = v.tolist()
        if isinstance(v, float) and not math.isfinite(v):
            return None
        if isinstance(v, dict):
            return {k: clean(u) for k, u in v.items()}
        if isinstance(v, (list, tuple)):
            return [clean(u) for u in v]
        return v

    return json.dumps(clean(obj), indent=2) + "\n"


RECORD_FIELDS = ("E", "lambda", "n_theta", "n_omega", "kappa", "label", "residual_E", "residual_lambda",
                 "in_guaranteed_region")


# ---------------------------------------------------------------------------
# commands


def cmd_solve(ns) -> int:
    params = _model(ns)
    _need(ns, "ntheta", "nomega")
    target = WindingTarget(ns.ntheta, ns.nomega)
    report = validate(params, target)
    if not report.accepted:
        print("inadmissible: " + "; ".join(report.reasons), file=sys.stderr)
        return 1
    if not report.in_guaranteed_region:
        log.warning("parameters outside the guaranteed region; results carry no uniqueness guarantee")
    try:
        state = solve_pair(params, target, **_solve_kwargs(ns))
        code = 0
    except NonConvergenceError as exc:
        print(f"not converged: {exc}", file=sys.stderr)
        state, code = exc.state, 2
    except (ConnectorError, IntegrationError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 2
    rec = state.to_dict()
    if (ns.format or ns._default_format) == "csv":
        text = _csv(RECORD_FIELDS + ("converged",), [[rec[k] for k in RECORD_FIELDS + ("converged",)]])
    else:
        text = _json(rec)
    _emit(text, ns.output)
    return code


@dataclass(frozen=True)
class ScanSpec:
    param: str
    start: float
    stop: float
    steps: int
    a: Optional[float]
    gamma: Optional[float]
    kappa: float
    targets: tuple[tuple[int, int], ...]
    tol: Optional[float] = None
    max_iter: Optional[int] = None

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps)

    def params_at(self, v: float) -> ModelParams:
        if self.param == "a":
            return ModelParams(a=v, gamma=self.gamma, kappa=self.kappa)
        g = v if self.param == "gamma" else -v * ALPHA_S
        return ModelParams(a=self.a, gamma=g, kappa=self.kappa)


def parse_targets(text: str) -> tuple[tuple[int, int], ...]:
    out = []
    for chunk in text.replace(";", " ").split():
        try:
            nt, no = chunk.split(",")
            out.append((int(nt), int(no)))
        except ValueError:
            raise UsageError(f"bad target {chunk!r}; expected NTHETA,NOMEGA")
    if not out:
        raise UsageError("no targets given")
    return tuple(out)


def _scan_point(job) -> dict:
    spec, v, (nt, no) = job
    row = {"sweep_value": float(v), "n_theta": nt, "n_omega": no, "kappa": spec.kappa,
           "E": math.nan, "lambda": math.nan, "converged": False, "label": ""}
    kw = {k: getattr(spec, k) for k in ("tol", "max_iter") if getattr(spec, k) is not None}
    try:
        params = spec.params_at(float(v))
        target = WindingTarget(nt, no)
        row["label"] = str(spectroscopic_label(target, spec.kappa))
        st = solve_pair(params, target, **kw)
        row.update(E=st.E, **{"lambda": st.lam}, converged=True)
    except NonConvergenceError as exc:
        row.update(E=exc.state.E, **{"lambda": exc.state.lam})
    except Exception as exc:  # one bad point must not abort the scan
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def run_scan(spec: ScanSpec, workers: int = 1) -> list[dict]:
    jobs = [(spec, v, t) for v in spec.values() for t in spec.targets]
    if workers <= 1:
        return [_scan_point(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_scan_point, jobs))


SCAN_FIELDS = ("sweep_value", "n_theta", "n_omega", "kappa", "E", "lambda", "converged", "label")


def cmd_scan(ns) -> int:
    if ns.steps is None and ns.step is not None and None not in (ns.start, ns.stop):
        if ns.step <= 0:
            raise UsageError("--step must be positive")
        ns.steps = int(round(abs(ns.stop - ns.start) / ns.step)) + 1
    _need(ns, "param", "start", "stop", "steps", "kappa")
    if ns.steps < 2:
        raise UsageError("--steps must be at least 2")
    if ns.param == "a":
        gamma, a = _coupling(ns), None
        if not (ns.start > 0 and ns.stop > 0):
            raise UsageError("swept a must be positive")
    else:
        _need(ns, "a")
        a, gamma = ns.a, None
        if ns.gamma is not None or ns.Z is not None:
            raise UsageError("the swept coupling cannot also be fixed")
    spec = ScanSpec(param=ns.param, start=ns.start, stop=ns.stop, steps=ns.steps, a=a, gamma=gamma,
                    kappa=ns.kappa, targets=parse_targets(ns.targets), tol=ns.tol, max_iter=ns.max_iter)
    workers = int(os.environ.get(WORKERS_ENV, "1") or 1)
    rows = run_scan(spec, max(1, workers))
    if (ns.format or ns._default_format) == "json":
        text = _json(rows)
    else:
        text = _csv(SCAN_FIELDS, [[r[k] for k in SCAN_FIELDS] for r in rows])
    _emit(text, ns.output)
    return 0


def cmd_oracle(ns) -> int:
    kind = ns.kind
    if kind == "sommerfeld":
        _need(ns, "M", "k")
        idx = oracles.SommerfeldIndex(ns.M, ns.k, _coupling(ns))
        value = oracles.sommerfeld_energy(idx)
    elif kind == "k":
        _need(ns, "N", "kappa")
        if ns.N == 0:
            raise InadmissibleError("N must be nonzero")
        value = oracles.a0_angular_k(ns.N, ns.kappa)
    elif kind == "bsw":
        _need(ns, "N", "kappa", "a", "E")
        if ns.N == 0:
            raise InadmissibleError("N must be nonzero")
        value = oracles.bsw_lambda(ns.kappa, ns.N, ns.a, ns.E, ns.convention)
    elif kind == "jacobi":
        _need(ns, "N", "kappa", "theta")
        value = float(oracles.jacobi_theta_connector(ns.N, ns.kappa, ns.theta))
    elif kind == "gordon":
        _need(ns, "M", "k", "r")
        value = float(oracles.gordon_omega_profile(oracles.SommerfeldIndex(ns.M, ns.k, _coupling(ns)), ns.r))
    else:  # roots
        _need(ns, "M", "k")
        value = oracles.count_denominator_roots(oracles.SommerfeldIndex(ns.M, ns.k, _coupling(ns)))
    print(fmt(value))
    return 0


def cmd_label(ns) -> int:
    _need(ns, "ntheta", "nomega", "kappa")
    lab = spectroscopic_label(WindingTarget(ns.ntheta, ns.nomega), ns.kappa)
    if (ns.format or ns._default_format) == "json":
        print(_json({"label": str(lab), "n": lab.n, "ell": lab.ell, "j": str(lab.j), "m_j": str(lab.m_j),
                     "k": lab.k, "M": lab.M}), end="")
    else:
        print(lab)
    return 0


def cmd_wavefunction(ns) -> int:
    from .wavefunction import wave_profile

    params = _model(ns)
    _need(ns, "ntheta", "nomega")
    target = WindingTarget(ns.ntheta, ns.nomega)
    report = validate(params, target)
    if not report.accepted:
        print("inadmissible: " + "; ".join(report.reasons), file=sys.stderr)
        return 1
    try:
        state = solve_pair(params, target, **_solve_kwargs(ns))
    except NonConvergenceError as exc:
        print(f"not converged: {exc}", file=sys.stderr)
        return 2
    except (ConnectorError, IntegrationError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 2
    prof = wave_profile(state, ns.grid)
    comments = [f"E={fmt(state.E)}", f"lambda={fmt(state.lam)}", f"label={state.label}",
                f"a={fmt(params.a)}", f"gamma={fmt(params.gamma)}", f"kappa={fmt(params.kappa)}",
                "density=2 R(r)^2 S(pi/2)^2; measure dr (both sheets) x sin(theta) dtheta"]
    rows = zip(prof.r, prof.R, prof.Omega, prof.theta, prof.S, prof.Theta, prof.density)
    _emit(_csv(("r", "R", "Omega", "theta", "S", "Theta", "density"), rows, comments), ns.output)
    return 0


def cmd_check(ns) -> int:
    params = _model(ns)
    E = ns.E if ns.E is not None else 0.5
    lam = ns.lam if ns.lam is not None else -0.5 - abs(params.kappa)
    th = check_assumptions(theta_field(ThetaContext(params, E)), [lam - 0.5, lam, lam + 0.5])
    om_ctx = OmegaContext(params, lam)
    om = check_assumptions(omega_field(om_ctx), [0.25, 0.5, 0.75])
    bar = barrier_check(om_ctx, E, ns.grid)
    out = {"theta": th.to_dict(), "omega": om.to_dict(), "barrier": bar.to_dict(),
           "in_guaranteed_region": params.in_guaranteed_region, "lambda_admissible": om_ctx.lambda_admissible}
    _emit(_json(out), ns.output)
    ok = th.all_checked_pass and om.all_checked_pass and bar.holds
    return 0 if ok or not params.in_guaranteed_region else 2


def build_parser() -> _Parser:
    p = _Parser(prog="zgkn", description="Dirac bound states around a charged ring via cylinder-flow connectors.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("solve", help="solve one bound state")
    _add_model(s)
    _add_solver(s)
    _add_output(s)
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("scan", help="sweep gamma, Z or a")
    _add_model(s, targets=False)
    _add_solver(s)
    s.add_argument("--param", choices=("gamma", "Z", "a"))
    s.add_argument("--from", dest="start", type=float)
    s.add_argument("--to", dest="stop", type=float)
    s.add_argument("--steps", type=int, help="number of sweep values")
    s.add_argument("--step", type=float, help="sweep increment (alternative to --steps)")
    s.add_argument("--targets", default="0,0", help="semicolon-separated NTHETA,NOMEGA pairs")
    _add_output(s, "csv")
    s.set_defaults(func=cmd_scan)

    s = sub.add_parser("oracle", help="closed-form reference values")
    s.add_argument("kind", choices=("sommerfeld", "k", "bsw", "jacobi", "gordon", "roots"))
    s.add_argument("--M", type=int)
    s.add_argument("--k", type=int)
    s.add_argument("--N", type=int)
    s.add_argument("--kappa", type=float)
    s.add_argument("--gamma", type=float)
    s.add_argument("--Z", type=float)
    s.add_argument("--a", type=float)
    s.add_argument("--E", type=float)
    s.add_argument("--theta", type=float)
    s.add_argument("--r", type=float)
    s.add_argument("--convention", choices=("printed", "operator"), default="printed")
    s.add_argument("--config")
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("label", help="spectroscopic label of a winding pair")
    s.add_argument("--ntheta", type=int)
    s.add_argument("--nomega", type=int)
    s.add_argument("--kappa", type=float)
    s.add_argument("--config")
    _add_output(s, "text")
    s.set_defaults(func=cmd_label)

    s = sub.add_parser("wavefunction", help="amplitude and density profile as CSV")
    _add_model(s)
    _add_solver(s)
    s.add_argument("--grid", type=int, default=2001)
    s.add_argument("--output", "-o")
    s.set_defaults(func=cmd_wavefunction)

    s = sub.add_parser("check", help="structural checks of both flows")
    _add_model(s, targets=False)
    s.add_argument("--E", type=float)
    s.add_argument("--lam", type=float)
    s.add_argument("--grid", type=int, default=1001)
    s.add_argument("--output", "-o")
    s.set_defaults(func=cmd_check)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    sub = None
    try:
        ns = parser.parse_args(argv)
        if ns.command is None:
            parser.print_help(sys.stderr)
            return 1
        logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                            format="%(levelname)s: %(message)s")
        sub = parser._subparsers._group_actions[0].choices[ns.command]
        _merge_config(ns, sub)
        return ns.func(ns)
    except UsageError as exc:
        if sub is not None:
            sub.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (InadmissibleError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
