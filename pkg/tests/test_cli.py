import json
import math
import os
import subprocess
import sys
from pathlib import Path

import pytest

from noisyis.config import config_echo, parse_config, validate_dict

REPO = Path(__file__).resolve().parent.parent
CONFIGS = REPO / "configs"


def run_cli(*args, env_extra=None):
    env = {**os.environ, **(env_extra or {})}
    return subprocess.run(
        [sys.executable, "-m", "noisyis", *args],
        capture_output=True,
        text=True,
        cwd=REPO,
        env=env,
    )


def write_config(tmp_path, text, name="run.toml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


BASIC = """
estimator = "is"
n = 500
seed = 3
[problem.target]
family = "gaussian"
mean = 0.0
variance = 1.0
[problem.proposal]
family = "gaussian"
mean = 0.0
variance = 2.0
[problem.f]
form = "square"
"""


# ---------------------------------------------------------------- estimate


def test_estimate_constant_integrand(tmp_path):
    cfg = write_config(
        tmp_path,
        """
estimator = "is"
n = 200
seed = 1
[problem.target]
family = "gaussian"
mean = 0.0
variance = 1.0
[problem.proposal]
family = "gaussian"
mean = 0.0
variance = 1.0
[problem.f]
form = "constant"
c = 3.0
""",
    )
    out = run_cli("estimate", cfg)
    assert out.returncode == 0, out.stderr
    payload = json.loads(out.stdout)
    assert payload["estimate"] == 3.0
    assert payload["std_error"] == 0.0
    assert payload["estimator_kind"] == "is"


def test_estimate_with_budget_flag(tmp_path):
    cfg = write_config(tmp_path, BASIC)
    out = run_cli("estimate", cfg, "--budget")
    assert out.returncode == 0, out.stderr
    payload = json.loads(out.stdout)
    assert math.isclose(payload["budget"]["sigma2"], 0.539600717839002, rel_tol=1e-8)
    assert payload["budget"]["sigma2_bar"] == payload["budget"]["sigma2"]


def test_estimate_narrow_proposal_runs_without_budget(tmp_path):
    narrow = BASIC.replace('variance = 2.0', 'variance = 0.4')
    cfg = write_config(tmp_path, narrow)
    assert run_cli("estimate", cfg).returncode == 0
    out = run_cli("estimate", cfg, "--budget")
    assert out.returncode == 3
    assert "OracleDivergence" in out.stderr


def test_estimate_csv_format(tmp_path):
    cfg = write_config(tmp_path, BASIC)
    out = run_cli("estimate", cfg, "--format", "csv")
    assert out.returncode == 0
    lines = out.stdout.strip().split("\n")
    assert lines[0] == "estimate,std_error,ci_lo,ci_hi,ess,n,estimator_kind"
    assert len(lines) == 2

    out = run_cli("estimate", cfg, "--format", "csv", "--budget")
    assert out.returncode == 0
    header = out.stdout.split("\n", 1)[0]
    assert header == (
        "estimate,std_error,ci_lo,ci_hi,ess,n,estimator_kind,"
        "sigma2,var_exp_z,second_moment_fw,sigma2_bar"
    )


# ---------------------------------------------------------------- config errors


def test_unknown_key_in_channel_block(tmp_path):
    cfg = write_config(
        tmp_path,
        BASIC + """
[channel]
family = "lognormal"
gama = 0.5
""",
    )
    out = run_cli("estimate", cfg)
    assert out.returncode == 2
    assert "gama" in out.stderr


def test_unknown_top_level_key(tmp_path):
    cfg = write_config(tmp_path, BASIC + "\nbogus = 1\n")
    out = run_cli("estimate", cfg)
    assert out.returncode == 2
    assert "bogus" in out.stderr


def test_unknown_key_in_nested_blocks(tmp_path):
    cfg = write_config(tmp_path, BASIC.replace('form = "square"', 'form = "square"\nscale = 2.0'))
    out = run_cli("estimate", cfg)
    assert out.returncode == 2
    assert "scale" in out.stderr

    cfg = write_config(tmp_path, BASIC + '\n[output]\nformat = "json"\nmode = "w"\n')
    out = run_cli("estimate", cfg)
    assert out.returncode == 2
    assert "mode" in out.stderr


def test_invalid_numeric_field(tmp_path):
    cfg = write_config(tmp_path, BASIC.replace('variance = 1.0', 'variance = -1.0'))
    out = run_cli("estimate", cfg)
    assert out.returncode == 2
    assert "variance" in out.stderr


def test_missing_config_file():
    out = run_cli("estimate", "/nonexistent/run.toml")
    assert out.returncode == 2


def test_malformed_toml(tmp_path):
    cfg = write_config(tmp_path, "this is not TOML [")
    out = run_cli("estimate", cfg)
    assert out.returncode == 2


def test_mean_one_violation_is_config_error(tmp_path):
    cfg = write_config(
        tmp_path,
        BASIC + """
[channel]
family = "two_point"
a = 0.5
b = 2.0
p = 0.5
""",
    )
    out = run_cli("estimate", cfg)
    assert out.returncode == 2
    assert "mean-one" in out.stderr


# ---------------------------------------------------------------- schemas


def test_sweep_csv_header_is_exact():
    out = run_cli("sweep", str(CONFIGS / "sweep_gamma.toml"))
    assert out.returncode == 0, out.stderr
    header = out.stdout.split("\n", 1)[0]
    assert header == (
        "gamma,n,replicates,empirical_var,predicted_var,"
        "inflation_empirical,inflation_predicted,ess_mean"
    )


def test_study_csv_header():
    out = run_cli("study", str(CONFIGS / "study_channels.toml"))
    assert out.returncode == 0, out.stderr
    header = out.stdout.split("\n", 1)[0]
    assert header == (
        "channel,n,replicates,replicate_mean,replicate_var,predicted_var,"
        "inflation_empirical,inflation_predicted,ci_coverage"
    )


def test_study_json_shape():
    out = run_cli("study", str(CONFIGS / "study_channels.toml"), "--format", "json")
    assert out.returncode == 0, out.stderr
    payload = json.loads(out.stdout)
    assert set(payload) == {"spec", "truth", "cells"}
    assert isinstance(payload["cells"], list) and payload["cells"]
    cell = payload["cells"][0]
    assert set(cell) == {
        "channel",
        "n",
        "replicates",
        "replicate_mean",
        "replicate_var",
        "predicted_var",
        "inflation_empirical",
        "inflation_predicted",
        "ci_coverage",
    }


def test_oracle_identity_budget_collapses(tmp_path):
    cfg = write_config(tmp_path, BASIC)
    out = run_cli("oracle", cfg)
    assert out.returncode == 0, out.stderr
    payload = json.loads(out.stdout)
    assert payload["sigma2_bar"] == payload["sigma2"]
    assert payload["oracle_mean"] == 1.0


def test_oracle_lognormal_budget():
    out = run_cli("oracle", str(CONFIGS / "oracle_budget.toml"))
    assert out.returncode == 0, out.stderr
    payload = json.loads(out.stdout)
    assert abs(payload["var_exp_z"] - 0.2840254) < 1e-6
    assert math.isclose(
        payload["sigma2_bar"],
        payload["sigma2"] + 0.2840254166877415 * payload["second_moment_fw"],
        rel_tol=1e-8,
    )


def test_sweep_rejects_two_point_channels(tmp_path):
    cfg = write_config(
        tmp_path,
        BASIC + """
replicates = 5

[[channels]]
family = "two_point"
a = 0.5
b = 2.0
p = 0.6666666666666666
""",
    )
    out = run_cli("sweep", cfg)
    assert out.returncode == 2


# ---------------------------------------------------------------- round trip


@pytest.mark.parametrize("name", sorted(p.name for p in CONFIGS.glob("*.toml")))
def test_config_round_trips_through_json_echo(name, tmp_path):
    cfg = parse_config(str(CONFIGS / name))
    assert validate_dict(config_echo(cfg)) == cfg

    command = {
        "estimate_basic.toml": "estimate",
        "estimate_noisy.toml": "estimate",
        "estimate_snis.toml": "estimate",
        "study_channels.toml": "study",
        "sweep_gamma.toml": "sweep",
        "oracle_budget.toml": "oracle",
    }[name]
    out = run_cli(command, str(CONFIGS / name), "--format", "json")
    assert out.returncode == 0, out.stderr
    echoed = json.loads(out.stdout)["spec"]
    assert validate_dict(echoed) == cfg


# ---------------------------------------------------------------- determinism


@pytest.mark.parametrize(
    "command,name",
    [
        ("estimate", "estimate_basic.toml"),
        ("estimate", "estimate_noisy.toml"),
        ("study", "study_channels.toml"),
        ("sweep", "sweep_gamma.toml"),
        ("oracle", "oracle_budget.toml"),
    ],
)
def test_reruns_are_byte_identical(command, name, tmp_path):
    a, b = tmp_path / "a.out", tmp_path / "b.out"
    assert run_cli(command, str(CONFIGS / name), "--output", str(a)).returncode == 0
    assert run_cli(command, str(CONFIGS / name), "--output", str(b)).returncode == 0
    assert a.read_bytes() == b.read_bytes()


def test_threads_do_not_change_bytes(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    cfg = str(CONFIGS / "study_channels.toml")
    assert run_cli("study", cfg, "--threads", "1", "--output", str(a)).returncode == 0
    assert run_cli("study", cfg, "--threads", "4", "--output", str(b)).returncode == 0
    assert a.read_bytes() == b.read_bytes()


def test_output_file_matches_stdout(tmp_path):
    path = tmp_path / "report.json"
    cfg = str(CONFIGS / "estimate_basic.toml")
    piped = run_cli("estimate", cfg)
    assert run_cli("estimate", cfg, "--output", str(path)).returncode == 0
    assert path.read_text() == piped.stdout
