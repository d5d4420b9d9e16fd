"""Command-line front end.

One TOML config per invocation; subcommands dispatch to the estimator,
study, sweep, and oracle layers and emit CSV or JSON. Exit codes: 0
success, 2 config error, 3 numeric/domain error. All numbers are
serialized with shortest round-trip decimals so reruns are
byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

from .bench import StudySpec, run_study, sweep_gamma
from .config import RunConfig, channel_dict, config_echo, parse_config
from .errors import ConfigError, DegenerateWeights, OracleDivergence, SupportViolation
from .estimator import estimate_noisy_is, estimate_snis, variance_budget
from .noise import IDENTITY, LOGNORMAL, NoiseChannel, var_exp_z
from .oracle import oracle_mean

SWEEP_CSV_HEADER = (
    "gamma,n,replicates,empirical_var,predicted_var,"
    "inflation_empirical,inflation_predicted,ess_mean"
)
STUDY_CSV_HEADER = (
    "channel,n,replicates,replicate_mean,replicate_var,predicted_var,"
    "inflation_empirical,inflation_predicted,ci_coverage"
)


def _fmt(value) -> str:
    # shortest decimal that round-trips the exact double
    return repr(float(value))


def _channel_tag(ch: NoiseChannel) -> str:
    if ch.family == LOGNORMAL:
        return f"lognormal({_fmt(ch.gamma)})"
    if ch.family == IDENTITY:
        return "identity"
    return f"two_point({_fmt(ch.a)},{_fmt(ch.b)},{_fmt(ch.p)})"


def _render_csv(header: str, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header.split(","))
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def _render_json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _write(text: str, path: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _budget_dict(budget) -> dict:
    return {
        "sigma2": budget.sigma2,
        "var_exp_z": budget.var_exp_z,
        "second_moment_fw": budget.second_moment_fw,
        "sigma2_bar": budget.sigma2_bar,
    }


def _single_channel(cfg: RunConfig) -> NoiseChannel:
    if len(cfg.channels) != 1:
        raise ConfigError("this command needs exactly one channel (use 'channel')")
    return cfg.channels[0]


def _single_n(cfg: RunConfig) -> int:
    if len(cfg.n_grid) != 1:
        raise ConfigError("this command needs a single sample count 'n'")
    return cfg.n_grid[0]


def _require_replicates(cfg: RunConfig) -> int:
    if cfg.replicates is None:
        raise ConfigError("missing key 'replicates' in config")
    return cfg.replicates


def cmd_estimate(cfg: RunConfig, out_format: str, out_path: str, with_budget: bool) -> None:
    channel = _single_channel(cfg)
    n = _single_n(cfg)
    estimator = estimate_snis if cfg.estimator in ("snis", "noisy_snis") else estimate_noisy_is
    report = estimator(cfg.target, cfg.proposal, cfg.f, channel, n, cfg.seed, cfg.alpha)
    budget = variance_budget(cfg.target, cfg.proposal, cfg.f, channel) if with_budget else None

    if out_format == "json":
        obj = {
            "spec": config_echo(cfg),
            "estimate": report.estimate,
            "std_error": report.std_error,
            "ci_lo": report.ci_lo,
            "ci_hi": report.ci_hi,
            "ess": report.ess,
            "n": report.n,
            "estimator_kind": report.estimator_kind,
        }
        if budget is not None:
            obj["budget"] = _budget_dict(budget)
        _write(_render_json(obj), out_path)
    else:
        header = "estimate,std_error,ci_lo,ci_hi,ess,n,estimator_kind"
        row = [
            _fmt(report.estimate),
            _fmt(report.std_error),
            _fmt(report.ci_lo),
            _fmt(report.ci_hi),
            _fmt(report.ess),
            str(report.n),
            report.estimator_kind,
        ]
        if budget is not None:
            header += ",sigma2,var_exp_z,second_moment_fw,sigma2_bar"
            row += [
                _fmt(budget.sigma2),
                _fmt(budget.var_exp_z),
                _fmt(budget.second_moment_fw),
                _fmt(budget.sigma2_bar),
            ]
        _write(_render_csv(header, [row]), out_path)


def _study_spec(cfg: RunConfig) -> StudySpec:
    return StudySpec(
        target=cfg.target,
        proposal=cfg.proposal,
        f=cfg.f,
        channels=cfg.channels,
        n_grid=cfg.n_grid,
        replicates=_require_replicates(cfg),
        base_seed=cfg.seed,
        estimator_kind=cfg.estimator,
        alpha=cfg.alpha,
    )


def cmd_study(cfg: RunConfig, out_format: str, out_path: str, threads: int) -> None:
    result = run_study(_study_spec(cfg), threads=threads)
    if out_format == "json":
        obj = {
            "spec": config_echo(cfg),
            "truth": result.truth,
            "cells": [
                {
                    "channel": channel_dict(cell.channel),
                    "n": cell.n,
                    "replicates": cfg.replicates,
                    "replicate_mean": cell.replicate_mean,
                    "replicate_var": cell.replicate_var,
                    "predicted_var": cell.predicted_var,
                    "inflation_empirical": cell.inflation_ratio_empirical,
                    "inflation_predicted": cell.inflation_ratio_predicted,
                    "ci_coverage": cell.ci_coverage,
                }
                for cell in result.cells
            ],
        }
        _write(_render_json(obj), out_path)
    else:
        rows = [
            [
                _channel_tag(cell.channel),
                str(cell.n),
                str(cfg.replicates),
                _fmt(cell.replicate_mean),
                _fmt(cell.replicate_var),
                _fmt(cell.predicted_var),
                _fmt(cell.inflation_ratio_empirical),
                _fmt(cell.inflation_ratio_predicted),
                _fmt(cell.ci_coverage),
            ]
            for cell in result.cells
        ]
        _write(_render_csv(STUDY_CSV_HEADER, rows), out_path)


def _sweep_gammas(cfg: RunConfig) -> list[float]:
    gammas = []
    for i, ch in enumerate(cfg.channels):
        if ch.family == LOGNORMAL:
            gammas.append(ch.gamma)
        elif ch.family == IDENTITY:
            gammas.append(0.0)
        else:
            raise ConfigError(
                f"sweep channels must be lognormal (or identity), got "
                f"'{ch.family}' in channels[{i}]"
            )
    return gammas


def cmd_sweep(cfg: RunConfig, out_format: str, out_path: str, threads: int) -> None:
    gammas = _sweep_gammas(cfg)
    try:
        rows = sweep_gamma(
            cfg.target,
            cfg.proposal,
            cfg.f,
            gammas,
            _single_n(cfg),
            _require_replicates(cfg),
            cfg.seed,
            alpha=cfg.alpha,
            threads=threads,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if out_format == "json":
        obj = {
            "spec": config_echo(cfg),
            "rows": [
                {
                    "gamma": r.gamma,
                    "n": r.n,
                    "replicates": r.replicates,
                    "empirical_var": r.empirical_var,
                    "predicted_var": r.predicted_var,
                    "inflation_empirical": r.inflation_empirical,
                    "inflation_predicted": r.inflation_predicted,
                    "ess_mean": r.ess_mean,
                }
                for r in rows
            ],
        }
        _write(_render_json(obj), out_path)
    else:
        csv_rows = [
            [
                _fmt(r.gamma),
                str(r.n),
                str(r.replicates),
                _fmt(r.empirical_var),
                _fmt(r.predicted_var),
                _fmt(r.inflation_empirical),
                _fmt(r.inflation_predicted),
                _fmt(r.ess_mean),
            ]
            for r in rows
        ]
        _write(_render_csv(SWEEP_CSV_HEADER, csv_rows), out_path)


def cmd_oracle(cfg: RunConfig, out_format: str, out_path: str) -> None:
    channel = _single_channel(cfg)
    budget = variance_budget(cfg.target, cfg.proposal, cfg.f, channel)
    mean = oracle_mean(cfg.target, cfg.f)
    if out_format == "json":
        obj = {"spec": config_echo(cfg), "oracle_mean": mean}
        obj.update(_budget_dict(budget))
        _write(_render_json(obj), out_path)
    else:
        header = "oracle_mean,sigma2,var_exp_z,second_moment_fw,sigma2_bar"
        row = [
            _fmt(mean),
            _fmt(budget.sigma2),
            _fmt(budget.var_exp_z),
            _fmt(budget.second_moment_fw),
            _fmt(budget.sigma2_bar),
        ]
        _write(_render_csv(header, [row]), out_path)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="noisyis",
        description="Importance sampling with mean-one multiplicative weight noise",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    specs = {
        "estimate": "run one estimator and report estimate/CI/ESS",
        "study": "replicate study over (channel, n) cells",
        "sweep": "gamma sweep of empirical vs predicted variance",
        "oracle": "quadrature moments and the variance budget",
    }
    for name, help_text in specs.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", help="path to a TOML run config")
        p.add_argument("--format", choices=("csv", "json"), default=None,
                       help="override the config's output format")
        p.add_argument("--output", default=None, help="override the output path ('-' = stdout)")
        p.add_argument("--threads", type=int, default=1, help="worker threads (results are identical for any value)")
        if name == "estimate":
            p.add_argument("--budget", action="store_true",
                           help="also compute the oracle variance budget")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config)
        out_format = args.format or cfg.out_format
        out_path = args.output if args.output is not None else cfg.out_path
        if args.threads < 1:
            raise ConfigError(f"--threads must be >= 1, got {args.threads}")
        if args.command == "estimate":
            cmd_estimate(cfg, out_format, out_path, args.budget)
        elif args.command == "study":
            cmd_study(cfg, out_format, out_path, args.threads)
        elif args.command == "sweep":
            cmd_sweep(cfg, out_format, out_path, args.threads)
        else:
            cmd_oracle(cfg, out_format, out_path)
        return 0
    except (SupportViolation, OracleDivergence, DegenerateWeights) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, ValueError, OSError) as exc:
        kind = type(exc).__name__ if isinstance(exc, ConfigError) else "ConfigError"
        print(f"{kind}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
