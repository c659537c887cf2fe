"""Experiment runner: load a config, run sweeps, write machine-readable reports.

Subcommands:

* ``run``      -- one Schwarz run; writes history.csv + summary.txt.
                  Exit 0 when the run converged, 2 when it diverged,
                  1 on operational failure (bad config, no verdict).
* ``tau``      -- closed-form contraction factors for the two-subdomain
                  model; prints tau1, tau2, tau and a converge/diverge
                  verdict (tau < 1).
* ``sweep``    -- re-run a config along one parameter axis; writes
                  sweep.csv with the engine verdict/rate per grid point
                  and the closed-form tau wherever the config matches the
                  analytic two-subdomain geometry.
* ``validate`` -- check problem assumptions and partition rules; exit 0
                  iff no violations.

Configs are JSON with a ``schema_version`` field; see README for the
schema.  CSV output never contains wall-clock times, so identical
configs produce byte-identical files.
"""

from __future__ import annotations

import argparse
import copy
import json
import sys
from pathlib import Path

import numpy as np

from . import oracle
from .geometry import Partition, build_uniform_partition, validate_partition
from .problem import ProblemSpec, catalog_lookup, validate as validate_problem
from .schwarz import IterationHistory, SchwarzConfig, run_elliptic, run_parabolic
from .transmission import TransmissionSpec

__all__ = ["main", "load_config", "build_schwarz_config"]

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Malformed or inconsistent experiment config."""


# --------------------------------------------------------------------------
# config handling
# --------------------------------------------------------------------------

def load_config(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    version = cfg.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION})")
    return cfg


def _problem_from_config(cfg: dict) -> tuple[ProblemSpec, str]:
    spec = cfg.get("problem")
    if isinstance(spec, str):
        return catalog_lookup(spec), spec
    if isinstance(spec, dict):
        return ProblemSpec.from_dict(spec), "(inline)"
    raise ConfigError("config needs a 'problem' (catalog id or inline object)")


def _partition_from_config(cfg: dict, length: float) -> Partition:
    spec = cfg.get("partition")
    if not isinstance(spec, dict) or len(spec) != 1:
        raise ConfigError("config needs a 'partition' ({uniform: ...} or {intervals: ...})")
    kind, body = next(iter(spec.items()))
    if kind == "uniform":
        return build_uniform_partition(length, int(body["count"]), float(body["overlap"]))
    if kind == "intervals":
        subs = tuple((float(lo), float(hi)) for lo, hi in body)
        return Partition(length=length, subdomains=subs)
    raise ConfigError(f"unknown partition kind {kind!r}")


def build_schwarz_config(cfg: dict) -> tuple[SchwarzConfig, str]:
    """Translate a config dict into a SchwarzConfig; returns (config, problem id)."""
    problem, problem_id = _problem_from_config(cfg)
    partition = _partition_from_config(cfg, problem.length)
    tdict = cfg.get("transmission", {"dirichlet": {}})
    transmission = TransmissionSpec.from_dict(tdict)
    grid = cfg.get("grid", {})
    if "h" not in grid:
        raise ConfigError("config needs grid.h")
    run = cfg.get("run", {})
    sc = SchwarzConfig(
        problem=problem,
        partition=partition,
        h_target=float(grid["h"]),
        dt_target=float(grid["dt"]) if grid.get("dt") is not None else None,
        transmission=transmission,
        u0=run.get("u0", "zero"),
        k_max=int(run.get("max_iters", 200)),
        stop_tol=float(run.get("stop_tol", 1e-10)),
        alpha=float(run.get("alpha", 10.0)),
        picard_tol=float(run.get("picard_tol", 1e-10)),
        picard_max=int(run.get("picard_max", 200)),
        guard_factor=float(run.get("guard_factor", 1e6)),
        rate_window=int(run.get("rate_window", 8)),
        max_workers=int(run.get("max_workers", 1)),
    )
    return sc, problem_id


def _oracle_case_from_config(cfg: dict):
    """AnalyticCase when the config matches the two-subdomain model, else None."""
    if cfg.get("problem") != "example31":
        return None
    part = cfg.get("partition", {})
    intervals = part.get("intervals")
    if not intervals or len(intervals) != 2:
        return None
    (a0, b0), (a1, b1) = intervals
    problem = catalog_lookup("example31")
    L = problem.length
    if abs(a0) > 1e-12 or abs(b1 - L) > 1e-12:
        return None
    L2, L1 = float(b0), float(a1)
    if not 0.0 < L1 < L2 < L:
        return None
    tdict = cfg.get("transmission", {})
    kind, body = next(iter(tdict.items())) if tdict else ("dirichlet", {})
    if kind == "dirichlet":
        return oracle.AnalyticCase(L=L, L1=L1, L2=L2, p=1.0, q=1.0), "dirichlet"
    p = body.get("p")
    if isinstance(p, dict):
        try:
            p_val, q_val = float(p["0,1"]), float(p["1,0"])
        except KeyError:
            return None
    else:
        p_val = q_val = float(p)
    rho = float(body.get("rho", 1.0)) if kind == "scaled_robin" else 1.0
    return oracle.AnalyticCase(L=L, L1=L1, L2=L2, p=p_val, q=q_val, rho=rho), "robin"


def _oracle_tau(cfg: dict) -> float | None:
    found = _oracle_case_from_config(cfg)
    if found is None:
        return None
    case, kind = found
    try:
        if kind == "dirichlet":
            return oracle.dirichlet_tau_factors(case).tau
        return oracle.tau_factors(case).tau
    except oracle.DegenerateParameterError:
        return None


# --------------------------------------------------------------------------
# report writing
# --------------------------------------------------------------------------

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        if np.isnan(v):
            return ""
        return format(v, ".17g")
    return str(v)


def _write_history_csv(path: Path, hist: IterationHistory) -> None:
    lines = ["k,l,norm,E_k,rate,verdict"]
    for k, l, norm, ek, rate, verdict in hist.to_csv_rows():
        lines.append(",".join([str(k), str(l), _fmt(norm), _fmt(ek), _fmt(rate), verdict]))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _summary_text(problem_id: str, cfg: dict, hist: IterationHistory) -> str:
    tkind = next(iter(cfg.get("transmission", {"dirichlet": {}})))
    lines = [
        f"problem:        {problem_id}",
        f"transmission:   {tkind}",
        f"norm:           {hist.norm_kind}",
        f"verdict:        {hist.verdict}",
        f"iterations:     {hist.iterations}",
        f"final E:        {_fmt(hist.E[-1]) if hist.E else ''}",
        f"rate/iter:      {_fmt(hist.rate_per_iteration)}",
        f"rate/double:    {_fmt(hist.rate_per_double)}",
        f"wall time (s):  {sum(hist.wall_times):.3f}",
    ]
    tau = _oracle_tau(cfg)
    if tau is not None:
        lines.append(f"oracle tau:     {_fmt(tau)}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    sc, problem_id = build_schwarz_config(cfg)
    hist = run_parabolic(sc) if sc.problem.mode == "parabolic" else run_elliptic(sc)
    out = Path(args.out or cfg.get("output", {}).get("dir", "out"))
    out.mkdir(parents=True, exist_ok=True)
    _write_history_csv(out / "history.csv", hist)
    summary = _summary_text(problem_id, cfg, hist)
    (out / "summary.txt").write_text(summary, encoding="utf-8")
    if not args.quiet:
        print(summary, end="")
    if hist.verdict == "converged":
        return 0
    if hist.verdict == "diverged":
        return 2
    print("no verdict within max_iters (stalled)", file=sys.stderr)
    return 1


def _cmd_tau(args) -> int:
    case = oracle.AnalyticCase(L=args.L, L1=args.L1, L2=args.L2, p=args.p, q=args.q,
                               rho=args.rho)
    f = oracle.tau_factors(case)
    print(f"tau1 = {_fmt(f.tau1)}")
    print(f"tau2 = {_fmt(f.tau2)}")
    print(f"tau  = {_fmt(f.tau)}")
    print(f"verdict: {'converge' if f.tau < 1.0 else 'diverge'} (tau {'<' if f.tau < 1.0 else '>='} 1)")
    return 0


_AXIS_HELP = ("transmission.rho, transmission.p, partition.overlap, "
              "grid.h, grid.dt, run.alpha (or any dotted config path)")


def _apply_axis(cfg: dict, axis: str, value) -> dict:
    out = copy.deepcopy(cfg)
    if axis == "transmission.rho":
        kind, body = next(iter(out["transmission"].items()))
        if kind == "dirichlet":
            raise ConfigError("cannot sweep rho on a Dirichlet config")
        out["transmission"] = {"scaled_robin": {**body, "rho": value}}
        return out
    if axis == "transmission.p":
        kind, body = next(iter(out["transmission"].items()))
        if kind == "dirichlet":
            raise ConfigError("cannot sweep p on a Dirichlet config")
        out["transmission"] = {kind: {**body, "p": value}}
        return out
    if axis == "partition.overlap":
        if "uniform" not in out.get("partition", {}):
            raise ConfigError("partition.overlap sweep needs a uniform partition")
        out["partition"]["uniform"]["overlap"] = value
        return out
    node = out
    *head, leaf = axis.split(".")
    for part in head:
        if not isinstance(node.get(part), dict):
            raise ConfigError(f"unknown sweep axis {axis!r} (try: {_AXIS_HELP})")
        node = node[part]
    if leaf not in node:
        raise ConfigError(f"unknown sweep axis {axis!r} (try: {_AXIS_HELP})")
    node[leaf] = value
    return out


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    sweep = cfg.get("sweep", {})
    axis, values = sweep.get("axis"), sweep.get("values")
    if not axis or not values:
        raise ConfigError("sweep needs config.sweep.axis and a nonempty value list")
    rows = ["axis,value,verdict,iterations,rate_double,tau,error"]
    first_converged = None
    for value in values:
        point = _apply_axis(cfg, axis, value)
        tau = _oracle_tau(point)
        try:
            sc, _ = build_schwarz_config(point)
            hist = run_parabolic(sc) if sc.problem.mode == "parabolic" else run_elliptic(sc)
            rows.append(",".join([axis, _fmt(float(value)), hist.verdict,
                                  str(hist.iterations), _fmt(hist.rate_per_double),
                                  _fmt(tau), ""]))
            if first_converged is None and hist.verdict == "converged":
                first_converged = value
        except Exception as exc:  # record the failure, keep sweeping
            rows.append(",".join([axis, _fmt(float(value)), "error", "", "",
                                  _fmt(tau), str(exc).replace(",", ";")]))
    out = Path(args.out or cfg.get("output", {}).get("dir", "out"))
    out.mkdir(parents=True, exist_ok=True)
    (out / "sweep.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    if not args.quiet:
        print("\n".join(rows))
        if first_converged is not None:
            print(f"# first converged at {axis} = {first_converged}")
    return 0


def _cmd_validate(args) -> int:
    cfg = load_config(args.config)
    problem, _ = _problem_from_config(cfg)
    rng = np.random.default_rng(args.seed)
    violations = validate_problem(problem, rng=rng)
    try:
        partition = _partition_from_config(cfg, problem.length)
        violations += validate_partition(partition)
    except (ConfigError, ValueError) as exc:
        violations.append(str(exc))
    for v in violations:
        print(v)
    if violations:
        return 1
    if not args.quiet:
        print("ok: all assumption and partition checks passed")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="schwarz1d",
        description="Overlapping Schwarz experiments on 1D semilinear problems",
    )
    parser.add_argument("--seed", type=int, default=0,
                        help="seed for randomized validation checks")
    parser.add_argument("--quiet", action="store_true", help="suppress stdout reports")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one Schwarz iteration experiment")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default=None, help="output directory (default: config output.dir)")

    p_tau = sub.add_parser("tau", help="closed-form contraction factors")
    p_tau.add_argument("--L", type=float, required=True)
    p_tau.add_argument("--L1", type=float, required=True)
    p_tau.add_argument("--L2", type=float, required=True)
    p_tau.add_argument("--p", type=float, required=True)
    p_tau.add_argument("--q", type=float, required=True)
    p_tau.add_argument("--rho", type=float, default=1.0)

    p_sweep = sub.add_parser("sweep", help="run a config along one parameter axis")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--out", default=None)

    p_val = sub.add_parser("validate", help="check problem assumptions and partition rules")
    p_val.add_argument("--config", required=True)

    args = parser.parse_args(argv)
    handler = {"run": _cmd_run, "tau": _cmd_tau, "sweep": _cmd_sweep,
               "validate": _cmd_validate}[args.command]
    try:
        return handler(args)
    except (ConfigError, ValueError, LookupError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
