"""Command line front end and CSV/summary persistence.

Subcommands map one-to-one onto the analysis operations::

    simulate         time integration, trajectory CSV
    classify         regime verdict for the configured habitat
    spectrum         principal eigenvalue and threshold for the habitat
    critical-length  sign-change length of the threshold eigenvalue
    periodic         periodic attractor (or extinction certificate), CSV
    profile-study    attractor deviation from the scalar orbit vs length
    ode-reference    closed-form scalar periodic orbit

Exit codes: 0 success, 2 configuration error, 3 solver error. All artifact
files are written atomically (temp file plus rename), so a failed run never
leaves partial CSVs behind; the summary records the failure instead.
"""

import argparse
import os
import sys
import tempfile
import time
from dataclasses import dataclass, field
from typing import Optional

from .config import ScenarioConfig, parse_config
from .errors import ConfigError, SolverError, ValidationError
from .evolution import Trajectory, evolve
from .model import BoundaryCondition
from .operator import assemble
from .periodic import (Extinction, PeriodicSolution, ProfileEntry,
                       asymptotic_profile_study, classify,
                       find_periodic_solution, ode_periodic_solution)
from .spectral import critical_length, principal_eigenpair, threshold

SCHEMA_VERSION = 1

COMMANDS = ("simulate", "classify", "spectrum", "critical-length", "periodic",
            "profile-study", "ode-reference")


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


@dataclass
class RunSummary:
    """Flat result record, rendered as ``key = value`` text."""

    command: str
    status: str = "ok"
    error: Optional[str] = None
    classification: Optional[str] = None
    growth_margin: Optional[float] = None
    sigma1: Optional[float] = None
    lambda1: Optional[float] = None
    ell_star: Optional[float] = None
    final_supnorm: Optional[float] = None
    eigen_residual: Optional[float] = None
    periodic_residual: Optional[float] = None
    ode_z0: Optional[float] = None
    evidence: Optional[str] = None
    grid_n: Optional[int] = None
    dt_good: Optional[float] = None
    n_periods: Optional[int] = None
    wall_time_s: Optional[float] = None
    extra: dict = field(default_factory=dict)

    def to_text(self) -> str:
        lines = [f"schema_version = {SCHEMA_VERSION}",
                 f"command = {self.command}",
                 f"status = {self.status}"]
        if self.error is not None:
            lines.append(f"error = {self.error}")
        for name in ("classification", "evidence"):
            v = getattr(self, name)
            if v is not None:
                lines.append(f"{name} = {v}")
        for name in ("growth_margin", "sigma1", "lambda1", "ell_star",
                     "final_supnorm", "eigen_residual", "periodic_residual",
                     "ode_z0", "dt_good", "wall_time_s"):
            v = getattr(self, name)
            if v is not None:
                lines.append(f"{name} = {_fmt(v)}")
        for name in ("grid_n", "n_periods"):
            v = getattr(self, name)
            if v is not None:
                lines.append(f"{name} = {v}")
        for key in sorted(self.extra):
            v = self.extra[key]
            lines.append(f"{key} = {_fmt(v) if isinstance(v, float) else v}")
        return "\n".join(lines) + "\n"


def _atomic_write(path: str, content: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(content)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def export_trajectory(tr: Trajectory, path: str) -> None:
    """Trajectory CSV: header ``t,x,u``, times ascending, nodes ascending."""
    x = tr.grid.nodes
    rows = ["t,x,u"]
    for k in range(len(tr)):
        t = _fmt(tr.times[k])
        vals = tr.values[k]
        rows.extend(f"{t},{_fmt(x[j])},{_fmt(vals[j])}" for j in range(x.size))
    _atomic_write(path, "\n".join(rows) + "\n")


def export_periodic(sol: PeriodicSolution, path: str) -> None:
    """Periodic attractor CSV: header ``t,x,ustar``."""
    x = sol.grid.nodes
    rows = ["t,x,ustar"]
    for k in range(sol.times.size):
        t = _fmt(sol.times[k])
        vals = sol.values[k]
        rows.extend(f"{t},{_fmt(x[j])},{_fmt(vals[j])}" for j in range(x.size))
    _atomic_write(path, "\n".join(rows) + "\n")


def export_profile(entries: list[ProfileEntry], path: str) -> None:
    """Profile-study CSV: header ``L,deviation``."""
    rows = ["L,deviation"]
    rows.extend(f"{_fmt(e.length)},{_fmt(e.deviation)}" for e in entries)
    _atomic_write(path, "\n".join(rows) + "\n")


def _require(cfg_value, key: str, command: str):
    if cfg_value is None:
        raise ConfigError(f"subcommand {command!r} requires key {key!r}")
    return cfg_value


def run_scenario(command: str, cfg: ScenarioConfig) -> RunSummary:
    """Execute one subcommand pipeline; artifacts are written on success only."""
    if command not in COMMANDS:
        raise ConfigError(f"unknown subcommand {command!r}")
    p = cfg.params
    t_start = time.perf_counter()
    summary = RunSummary(command=command, growth_margin=p.growth_margin,
                         grid_n=cfg.grid.n, dt_good=cfg.ctl.dt_good)

    if command == "simulate":
        n_periods = _require(cfg.n_periods, "run.n_periods", command)
        _require(cfg.out_trajectory, "out.trajectory", command)
        op = assemble(cfg.kernel, cfg.grid, cfg.bc, p.d)
        tr = evolve(cfg.initial_state(), p, op, cfg.ctl, n_periods * p.omega)
        verdict = classify(p, cfg.kernel, cfg.bc, domain=cfg.grid)
        export_trajectory(tr, cfg.out_trajectory)
        summary.classification = verdict.regime.value
        summary.sigma1 = verdict.sigma1
        summary.lambda1 = verdict.lambda1
        summary.ell_star = verdict.ell_star
        summary.final_supnorm = tr.final.sup_norm
        summary.n_periods = n_periods

    elif command == "classify":
        verdict = classify(p, cfg.kernel, cfg.bc, domain=cfg.grid)
        summary.classification = verdict.regime.value
        summary.sigma1 = verdict.sigma1
        summary.lambda1 = verdict.lambda1
        summary.ell_star = verdict.ell_star

    elif command == "spectrum":
        op = assemble(cfg.kernel, cfg.grid, cfg.bc, p.d)
        if cfg.bc is BoundaryCondition.DIRICHLET:
            pair = principal_eigenpair(op, p.a)
            report = threshold(p, op, pair)
            summary.sigma1 = pair.sigma1
            summary.eigen_residual = pair.residual
            summary.extra["eigen_iterations"] = pair.iterations
        else:
            report = threshold(p, op)
        summary.lambda1 = report.lambda1

    elif command == "critical-length":
        res = critical_length(p, cfg.kernel)
        summary.classification = res.verdict.value
        summary.ell_star = res.ell_star
        if res.bracket is not None:
            summary.extra["bracket_lo"] = res.bracket[0]
            summary.extra["bracket_hi"] = res.bracket[1]

    elif command == "periodic":
        if cfg.bc is not BoundaryCondition.DIRICHLET:
            raise ConfigError("subcommand 'periodic' requires bc = dirichlet")
        op = assemble(cfg.kernel, cfg.grid, cfg.bc, p.d)
        pair = principal_eigenpair(op, p.a)
        summary.sigma1 = pair.sigma1
        summary.eigen_residual = pair.residual
        sol = find_periodic_solution(p, op, pair, cfg.ctl)
        summary.lambda1 = sol.lambda1
        if isinstance(sol, Extinction):
            summary.classification = "extinction"
            summary.evidence = sol.evidence
            summary.final_supnorm = sol.final_supnorm
            summary.extra["periods"] = sol.periods
        else:
            _require(cfg.out_periodic, "out.periodic", command)
            export_periodic(sol, cfg.out_periodic)
            summary.classification = "periodic_solution"
            summary.periodic_residual = sol.residual
            summary.final_supnorm = sol.sup_norm

    elif command == "profile-study":
        lengths = _require(cfg.profile_lengths, "profile.lengths", command)
        _require(cfg.out_profile, "out.profile", command)
        entries = asymptotic_profile_study(p, cfg.kernel, lengths)
        export_profile(entries, cfg.out_profile)
        summary.extra["n_lengths"] = str(len(entries))
        summary.extra["final_deviation"] = entries[-1].deviation

    elif command == "ode-reference":
        sol = ode_periodic_solution(p)
        if sol is None:
            summary.classification = "no_positive_solution"
        else:
            summary.classification = "periodic_solution"
            summary.ode_z0 = sol.z0

    summary.wall_time_s = time.perf_counter() - t_start
    return summary


def _parse_overrides(pairs: Optional[list[str]]) -> dict[str, str]:
    out: dict[str, str] = {}
    for item in pairs or []:
        if "=" not in item:
            raise ConfigError(f"--override expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="seasonal-dispersal",
        description="Seasonal nonlocal dispersal logistic model toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="path to key = value config")
        sp.add_argument("--override", action="append", default=[],
                        metavar="KEY=VALUE", help="override a config key")
    args = parser.parse_args(argv)

    try:
        with open(args.config) as fh:
            text = fh.read()
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    try:
        cfg = parse_config(text, _parse_overrides(args.override))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    try:
        summary = run_scenario(args.command, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ValidationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        summary = RunSummary(command=args.command, status="failed", error=str(exc))
        if cfg.out_summary is not None:
            _atomic_write(cfg.out_summary, summary.to_text())
        print(f"solver error: {exc}", file=sys.stderr)
        return 3

    if cfg.out_summary is not None:
        _atomic_write(cfg.out_summary, summary.to_text())
    sys.stdout.write(summary.to_text())
    return 0


if __name__ == "__main__":
    sys.exit(main())
