"""Config-file schema: one TOML file describes one run.

Unknown keys anywhere are a hard error, and every numeric field is
validated against its type invariants at parse time. The echo emitted
in JSON outputs is the canonical form of the same schema, so outputs
re-parse losslessly.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass

if sys.version_info >= (3, 11):
    import tomllib as _toml
else:
    import tomli as _toml

from .errors import ConfigError
from .model import Density, Integrand, GAUSSIAN, GAUSSIAN_MIXTURE, UNIFORM
from .noise import NoiseChannel, IDENTITY, LOGNORMAL, TWO_POINT

_ESTIMATORS = ("is", "noisy_is", "snis", "noisy_snis")
_TOP_KEYS = {
    "problem",
    "channel",
    "channels",
    "estimator",
    "n",
    "replicates",
    "seed",
    "alpha",
    "output",
}


@dataclass(frozen=True)
class RunConfig:
    target: Density
    proposal: Density
    f: Integrand
    channels: tuple[NoiseChannel, ...]
    estimator: str
    n_grid: tuple[int, ...]
    replicates: int | None
    seed: int
    alpha: float
    out_format: str
    out_path: str


def _check_keys(block: dict, allowed, where: str) -> None:
    for key in block:
        if key not in allowed:
            raise ConfigError(f"unknown key '{key}' in {where}")


def _get(block: dict, key: str, where: str):
    if key not in block:
        raise ConfigError(f"missing key '{key}' in {where}")
    return block[key]


def _number(value, key: str, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"key '{key}' in {where} must be a number, got {value!r}")
    return float(value)


def _integer(value, key: str, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"key '{key}' in {where} must be an integer, got {value!r}")
    return value


def _table(value, key: str, where: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(f"key '{key}' in {where} must be a table, got {value!r}")
    return value


def _density(block: dict, where: str) -> Density:
    family = _get(block, "family", where)
    try:
        if family == GAUSSIAN:
            _check_keys(block, {"family", "mean", "variance"}, where)
            return Density.gaussian(
                _number(_get(block, "mean", where), "mean", where),
                _number(_get(block, "variance", where), "variance", where),
            )
        if family == GAUSSIAN_MIXTURE:
            _check_keys(block, {"family", "components"}, where)
            comps = _get(block, "components", where)
            if not isinstance(comps, list) or not comps:
                raise ConfigError(f"key 'components' in {where} must be a nonempty list")
            parsed = []
            for i, comp in enumerate(comps):
                sub = f"{where}.components[{i}]"
                comp = _table(comp, "components", where)
                _check_keys(comp, {"weight", "mean", "variance"}, sub)
                parsed.append(
                    (
                        _number(_get(comp, "weight", sub), "weight", sub),
                        _number(_get(comp, "mean", sub), "mean", sub),
                        _number(_get(comp, "variance", sub), "variance", sub),
                    )
                )
            return Density.gaussian_mixture(parsed)
        if family == UNIFORM:
            _check_keys(block, {"family", "lo", "hi"}, where)
            return Density.uniform(
                _number(_get(block, "lo", where), "lo", where),
                _number(_get(block, "hi", where), "hi", where),
            )
    except ValueError as exc:
        raise ConfigError(f"invalid {where}: {exc}") from exc
    raise ConfigError(f"unknown density family {family!r} in {where}")


def _integrand(block: dict, where: str) -> Integrand:
    form = _get(block, "form", where)
    try:
        if form == "identity":
            _check_keys(block, {"form"}, where)
            return Integrand.identity()
        if form == "square":
            _check_keys(block, {"form"}, where)
            return Integrand.square()
        if form == "indicator":
            _check_keys(block, {"form", "threshold"}, where)
            return Integrand.indicator(
                _number(_get(block, "threshold", where), "threshold", where)
            )
        if form == "polynomial":
            _check_keys(block, {"form", "coeffs"}, where)
            coeffs = _get(block, "coeffs", where)
            if not isinstance(coeffs, list) or not coeffs:
                raise ConfigError(f"key 'coeffs' in {where} must be a nonempty list")
            return Integrand.polynomial(
                [_number(a, "coeffs", where) for a in coeffs]
            )
        if form == "constant":
            _check_keys(block, {"form", "c"}, where)
            return Integrand.constant(_number(_get(block, "c", where), "c", where))
    except ValueError as exc:
        raise ConfigError(f"invalid {where}: {exc}") from exc
    raise ConfigError(f"unknown integrand form {form!r} in {where}")


def _channel(block: dict, where: str) -> NoiseChannel:
    family = _get(block, "family", where)
    try:
        if family == IDENTITY:
            _check_keys(block, {"family"}, where)
            return NoiseChannel.identity()
        if family == LOGNORMAL:
            _check_keys(block, {"family", "gamma"}, where)
            return NoiseChannel.lognormal(
                _number(_get(block, "gamma", where), "gamma", where)
            )
        if family == TWO_POINT:
            _check_keys(block, {"family", "a", "b", "p"}, where)
            return NoiseChannel.two_point(
                _number(_get(block, "a", where), "a", where),
                _number(_get(block, "b", where), "b", where),
                _number(_get(block, "p", where), "p", where),
            )
    except ValueError as exc:
        raise ConfigError(f"invalid {where}: {exc}") from exc
    raise ConfigError(f"unknown channel family {family!r} in {where}")


def validate_dict(raw: dict) -> RunConfig:
    """Validate a parsed config mapping into a RunConfig."""
    _check_keys(raw, _TOP_KEYS, "config")

    problem = _table(_get(raw, "problem", "config"), "problem", "config")
    _check_keys(problem, {"target", "proposal", "f"}, "problem")
    target = _density(_table(_get(problem, "target", "problem"), "target", "problem"), "problem.target")
    proposal = _density(
        _table(_get(problem, "proposal", "problem"), "proposal", "problem"), "problem.proposal"
    )
    f = _integrand(_table(_get(problem, "f", "problem"), "f", "problem"), "problem.f")

    if "channel" in raw and "channels" in raw:
        raise ConfigError("config must not define both 'channel' and 'channels'")
    if "channel" in raw:
        channels = (_channel(_table(raw["channel"], "channel", "config"), "channel"),)
    elif "channels" in raw:
        entries = raw["channels"]
        if not isinstance(entries, list) or not entries:
            raise ConfigError("key 'channels' in config must be a nonempty list")
        channels = tuple(
            _channel(_table(c, "channels", "config"), f"channels[{i}]")
            for i, c in enumerate(entries)
        )
    else:
        channels = (NoiseChannel.identity(),)

    estimator = raw.get("estimator", "is")
    if estimator not in _ESTIMATORS:
        raise ConfigError(
            f"key 'estimator' must be one of {_ESTIMATORS}, got {estimator!r}"
        )

    n_raw = _get(raw, "n", "config")
    if isinstance(n_raw, list):
        n_grid = tuple(_integer(v, "n", "config") for v in n_raw)
    else:
        n_grid = (_integer(n_raw, "n", "config"),)
    if not n_grid or any(v < 2 for v in n_grid):
        raise ConfigError(f"key 'n' must contain counts >= 2, got {n_raw!r}")
    if any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise ConfigError(f"key 'n' must be strictly increasing, got {n_raw!r}")

    replicates = None
    if "replicates" in raw:
        replicates = _integer(raw["replicates"], "replicates", "config")
        if replicates < 2:
            raise ConfigError(f"key 'replicates' must be >= 2, got {replicates}")

    seed = _integer(_get(raw, "seed", "config"), "seed", "config")

    alpha = _number(raw.get("alpha", 0.05), "alpha", "config")
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"key 'alpha' must be in (0, 1), got {alpha}")

    out_format, out_path = "json", "-"
    if "output" in raw:
        out = _table(raw["output"], "output", "config")
        _check_keys(out, {"format", "path"}, "output")
        out_format = out.get("format", "json")
        if out_format not in ("csv", "json"):
            raise ConfigError(
                f"key 'format' in output must be 'csv' or 'json', got {out_format!r}"
            )
        out_path = out.get("path", "-")
        if not isinstance(out_path, str):
            raise ConfigError(f"key 'path' in output must be a string, got {out_path!r}")

    return RunConfig(
        target=target,
        proposal=proposal,
        f=f,
        channels=channels,
        estimator=estimator,
        n_grid=n_grid,
        replicates=replicates,
        seed=seed,
        alpha=alpha,
        out_format=out_format,
        out_path=out_path,
    )


def parse_config(path: str) -> RunConfig:
    """Load and validate a TOML config file."""
    try:
        with open(path, "rb") as fh:
            raw = _toml.load(fh)
    except _toml.TOMLDecodeError as exc:
        raise ConfigError(f"config is not valid TOML: {exc}") from exc
    return validate_dict(raw)


def density_dict(d: Density) -> dict:
    if d.family == UNIFORM:
        return {"family": d.family, "lo": d.lo, "hi": d.hi}
    if d.family == GAUSSIAN:
        _, m, v = d.components[0]
        return {"family": d.family, "mean": m, "variance": v}
    return {
        "family": d.family,
        "components": [
            {"weight": w, "mean": m, "variance": v} for w, m, v in d.components
        ],
    }


def integrand_dict(f: Integrand) -> dict:
    if f.form == "indicator":
        return {"form": f.form, "threshold": f.threshold}
    if f.form == "polynomial":
        return {"form": f.form, "coeffs": list(f.coeffs)}
    if f.form == "constant":
        return {"form": f.form, "c": f.c}
    return {"form": f.form}


def channel_dict(ch: NoiseChannel) -> dict:
    if ch.family == LOGNORMAL:
        return {"family": ch.family, "gamma": ch.gamma}
    if ch.family == TWO_POINT:
        return {"family": ch.family, "a": ch.a, "b": ch.b, "p": ch.p}
    return {"family": ch.family}


def config_echo(cfg: RunConfig) -> dict:
    """Canonical mapping form of a RunConfig; validate_dict() round-trips it."""
    echo = {
        "problem": {
            "target": density_dict(cfg.target),
            "proposal": density_dict(cfg.proposal),
            "f": integrand_dict(cfg.f),
        },
        "channels": [channel_dict(ch) for ch in cfg.channels],
        "estimator": cfg.estimator,
        "n": list(cfg.n_grid),
        "seed": cfg.seed,
        "alpha": cfg.alpha,
        "output": {"format": cfg.out_format, "path": cfg.out_path},
    }
    if cfg.replicates is not None:
        echo["replicates"] = cfg.replicates
    return echo
