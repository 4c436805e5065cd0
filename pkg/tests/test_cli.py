import csv
import json
import math

import pytest

from polydensity.cli import CSV_HEADER, loglog_slope, main


def write_config(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


UNIFORM = {"target": {"kind": "uniform"}, "learner": {"t": 1, "d": 0, "epsilon": 0.2}, "trials": 2, "seed": 3}


def read_rows(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_learn_writes_outputs(tmp_path):
    out = tmp_path / "out"
    assert main(["learn", "--config", write_config(tmp_path, UNIFORM), "--out-dir", str(out)]) == 0
    rows = read_rows(out / "results.csv")
    assert tuple(rows[0]) == CSV_HEADER
    assert [r[0] for r in rows[1:]] == ["3", "4"]
    report = json.loads((out / "reports" / "trial_000.json").read_text())
    assert report["seed"] == 3 and "tau_table_summary" in report
    assert json.loads((out / "hypotheses" / "trial_001.json").read_text())["is_distribution"] is True


def test_fixed_seed_is_byte_identical(tmp_path):
    cfg = write_config(tmp_path, {**UNIFORM, "target": {"kind": "triangle"}, "learner": {"d": 1, "epsilon": 0.2}})
    for name in ("a", "b"):
        assert main(["learn", "--config", cfg, "--out-dir", str(tmp_path / name), "--trials", "1", "--no-timing"]) == 0
    assert (tmp_path / "a" / "results.csv").read_bytes() == (tmp_path / "b" / "results.csv").read_bytes()


def test_seed_and_trials_override(tmp_path):
    out = tmp_path / "o"
    main(["learn", "--config", write_config(tmp_path, UNIFORM), "--out-dir", str(out), "--seed", "10", "--trials", "3"])
    assert [r[0] for r in read_rows(out / "results.csv")[1:]] == ["10", "11", "12"]


@pytest.mark.parametrize(
    "cfg,field",
    [
        ({**UNIFORM, "learner": {"t": 1, "epsilon": 0.0}}, "learner.epsilon"),
        ({**UNIFORM, "learner": {"t": 0, "epsilon": 0.1}}, "learner.t"),
        ({"learner": {"epsilon": 0.1}}, "target"),
        ({**UNIFORM, "target": {"kind": "nope"}}, "target"),
    ],
)
def test_config_errors_exit_2(tmp_path, capsys, cfg, field):
    code = main(["learn", "--config", write_config(tmp_path, cfg), "--out-dir", str(tmp_path / "x")])
    assert code == 2
    assert field in capsys.readouterr().err


def test_missing_config_file(tmp_path, capsys):
    assert main(["learn", "--config", str(tmp_path / "none.json")]) == 2
    assert "config" in capsys.readouterr().err


def test_scaling_needs_three_sizes(tmp_path):
    cfg = {**UNIFORM, "sample_sizes": [100, 1000]}
    assert main(["scaling", "--config", write_config(tmp_path, cfg), "--out-dir", str(tmp_path / "s")]) == 2


def test_scaling_summary(tmp_path):
    cfg = {**UNIFORM, "trials": 1, "sample_sizes": [1000, 2000, 4000]}
    out = tmp_path / "s"
    assert main(["scaling", "--config", write_config(tmp_path, cfg), "--out-dir", str(out), "--no-timing"]) == 0
    rows = read_rows(out / "summary.csv")
    assert rows[0] == ["m", "median_tv_error"]
    assert rows[-1][0] == "slope"
    # the uniform target is learned exactly, so the slope is undefined
    assert math.isnan(float(rows[-1][1]))


def test_loglog_slope():
    assert loglog_slope([10, 100, 1000], [1.0, 0.1, 0.01]) == pytest.approx(-1.0)
    assert math.isnan(loglog_slope([10, 100, 1000], [0.0, 0.0, 0.0]))


def test_decompose_not_log_concave_exits_3(tmp_path):
    cfg = {"target": {"kind": "convex_decreasing"}, "mode": "logconcave", "epsilon": 0.05}
    assert main(["decompose", "--config", write_config(tmp_path, cfg), "--out-dir", str(tmp_path / "d")]) == 3


def test_decompose_gaussian(tmp_path):
    cfg = {
        "target": {"kind": "truncated_gaussian", "params": {"mu": 0, "sigma": 1}, "truncation": None},
        "mode": "gaussian",
        "epsilon": 0.001,
    }
    out = tmp_path / "g"
    assert main(["decompose", "--config", write_config(tmp_path, cfg), "--out-dir", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["pieces"] == 3 and report["tv"] <= 1e-3


def test_discrete_learn(tmp_path):
    cfg = {
        "pmf": {"N": 16, "masses": [0.7 / 16] * 16 + [0.3 / 16] * 16},
        "learner": {"t": 2, "epsilon": 0.2},
        "trials": 1,
    }
    out = tmp_path / "p"
    assert main(["discrete-learn", "--config", write_config(tmp_path, cfg), "--out-dir", str(out)]) == 0
    rows = read_rows(out / "results.csv")
    assert float(rows[1][2]) <= 0.2


def test_strict_mode_forces_one_job(tmp_path, monkeypatch):
    monkeypatch.setenv("POLYDENSITY_FP_STRICT", "1")
    out = tmp_path / "j"
    assert main(["learn", "--config", write_config(tmp_path, UNIFORM), "--out-dir", str(out), "--jobs", "4"]) == 0
