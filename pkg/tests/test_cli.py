import io
from pathlib import Path

import pytest
import yaml

from bwk.cli import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, main

CONFIGS = Path(__file__).parent.parent / "configs"


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def write(tmp_path, **over):
    d = {"spec_version": 1,
         "instance": {"mean_rewards": [0.9, 0.3], "mean_costs": [[0.8, 0.2], [1, 1]], "budget_ratios": [0.5, 1],
                      "time_is_resource": True},
         "policies": [{"case": "case3", "kappa": 1.0}], "b_grid": [100, 200, 400], "replications": 3}
    d.update(over)
    path = tmp_path / "exp.yaml"
    path.write_text(yaml.safe_dump(d))
    return str(path)


@pytest.mark.parametrize("argv", [[], ["dance"], ["run"], ["verify", "--instances", "x"], ["sweep", "c.yaml", "--jobs"]])
def test_usage_errors(argv):
    assert run(*argv)[0] == EXIT_USAGE


def test_config_errors(tmp_path):
    assert run("run", str(tmp_path / "nope.yaml"))[0] == EXIT_CONFIG
    assert run("sweep", write(tmp_path, spec_version=3))[0] == EXIT_CONFIG
    assert run("analyze", write(tmp_path, instance={"scenario": "lottery"}))[0] == EXIT_CONFIG
    bad = tmp_path / "bad.yaml"
    bad.write_text("policies: [")
    assert run("run", str(bad))[0] == EXIT_CONFIG


def test_runtime_error_exit(tmp_path):
    cfg = write(tmp_path, instance={"mean_rewards": [0.5], "mean_costs": [[0.05]], "budget_ratios": [1.0],
                                    "kind": "deterministic-cost"}, policies=[{"eta": [1.0]}])
    code, text = run("run", cfg)
    assert code == EXIT_RUNTIME and "unbounded" in text
    assert run("sweep", cfg)[0] == EXIT_RUNTIME


def test_run_and_sweep(tmp_path):
    cfg = write(tmp_path, output="r.csv")
    code, text = run("run", cfg, "--seed", "5", "--assert", "paranoid")
    assert code == EXIT_OK and "tau*=" in text
    code, text = run("sweep", cfg, "--jobs", "2")
    assert code == EXIT_OK and text.startswith("policy_id,B,reps")
    assert (tmp_path / "r.csv").read_text() in text
    first = (tmp_path / "r.csv").read_bytes()
    run("sweep", cfg, "--seed", "9")
    assert (tmp_path / "r.csv").read_bytes() != first


def test_single_replication_note(tmp_path):
    code, text = run("sweep", write(tmp_path, replications=1))
    assert code == EXIT_OK and "confidence intervals undefined" in text


def test_analyze_example_config():
    code, text = run("analyze", str(CONFIGS / "case3_example.yaml"))
    assert code == EXIT_OK
    assert "obj* 0.6 " in text and "pass" in text
    gaps = [float(line.split("gap")[-1]) for line in text.splitlines() if " gap " in line]
    assert sorted(gaps) == pytest.approx([0.0, 0.0375, 0.3, 0.6])


def test_verify_and_scenarios():
    code, text = run("verify", "--instances", "50")
    assert code == EXIT_OK and "verify: ok" in text
    code, text = run("scenarios")
    assert code == EXIT_OK and text.count("\n") == 6 and "sensors:" in text
