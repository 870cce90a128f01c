import json
import os

import pytest

from odinfer.cli import main
from odinfer.core import read_dataset_csv
from odinfer.harness import read_coverage_csv


def test_simulate_roundtrip(tmp_path, capsys):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("scenario = bandit\npolicy = ucb\nn = 80\nseed = 11\n")
    rc = main(["simulate", "--config", str(cfg), "--out", str(tmp_path)])
    assert rc == 0
    ds = read_dataset_csv(tmp_path / "dataset.csv")
    assert len(ds) == 80 and ds.d == 2
    assert ds.meta["policy"] == "ucb"
    assert ds.meta["seed"] == 11


def test_fit_outputs_json(tmp_path, capsys):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("scenario = bandit\nn = 120\nseed = 3\n")
    main(["simulate", "--config", str(cfg), "--out", str(tmp_path)])
    capsys.readouterr()
    rc = main(["fit", "--data", str(tmp_path / "dataset.csv"), "--schedule", "bandit",
               "--alpha", "0.05", "--concentration"])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert out["n"] == 120 and out["d"] == 2
    assert len(out["theta_od"]) == 2
    assert len(out["intervals"]) == 2
    assert "od_direction" in out["intervals"][0]


def test_experiment_emits_files(tmp_path, capsys):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text(
        "scenario = bandit\nn = 100\nreplications = 6\nalpha = 0.1\n"
        "methods = od_direction, naive_ols\nseed = 5\n"
    )
    out = tmp_path / "out"
    rc = main(["experiment", "--config", str(cfg), "--out", str(out)])
    assert rc == 0
    rows = read_coverage_csv(out / "coverage.csv")
    assert len(rows) == 2 * 1 * 3  # methods x alphas x tails
    resolved = (out / "config_resolved.txt").read_text()
    assert "seed = 5" in resolved
    assert "backend = " in resolved
    assert os.path.exists(out / "errors.csv")


def test_experiment_seed_and_threads_override(tmp_path, capsys):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("scenario = bandit\nn = 100\nreplications = 4\nalpha = 0.1\nseed = 5\n")
    out1 = tmp_path / "o1"
    out2 = tmp_path / "o2"
    main(["experiment", "--config", str(cfg), "--out", str(out1), "--seed", "99", "--threads", "2"])
    main(["experiment", "--config", str(cfg), "--out", str(out2), "--seed", "99", "--threads", "1"])
    assert (out1 / "coverage.csv").read_text() == (out2 / "coverage.csv").read_text()
    assert (out1 / "errors.csv").read_text() == (out2 / "errors.csv").read_text()


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
