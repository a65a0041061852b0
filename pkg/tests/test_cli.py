from __future__ import annotations

import csv
import json

import pytest

import sgeo_vqa.qsim as qsim
from sgeo_vqa import validate
from sgeo_vqa.cli import main
from sgeo_vqa.output import fmt, read_csv, write_csv

FAST_BURGERS = "burgers:\n  t_final: 0.05\nestimator:\n  shots: 2000\n"


def rows(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_validate_all_pass_and_enough_families(capsys):
    results = validate.run_validate()
    assert len(results) >= 12
    assert all(r.passed for r in results), [r.line() for r in results if not r.passed]
    assert main(["validate"]) == 0
    assert "15/15" in capsys.readouterr().out


def test_validate_detects_adder_sign_flip(monkeypatch):
    original = qsim.apply_middle

    def flipped(amps, middle):
        out = original(amps, middle)
        return -out if any(isinstance(op, qsim.AdderOp) for op in middle) else out

    monkeypatch.setattr(qsim, "apply_middle", flipped)
    assert validate.kinetic_reconstruction() > 1.0
    results = {r.name: r for r in validate.run_validate()}
    assert not results["kinetic energy vs stencil oracle"].passed
    assert main(["validate"]) == 1


def test_nlse_cli_outputs(tmp_path):
    out = tmp_path / "run"
    assert main(["nlse", "--g", "750", "--out", str(out), "--exact"]) == 0
    for name in ("convergence.csv", "groundstate.csv", "fig6.csv", "summary.json", "resolved_config.yaml"):
        assert (out / name).exists()
    header, data = read_csv(out / "convergence.csv")
    assert header == ["C_E", "dE", "infidelity", "E_P", "E_I", "E_K"]
    assert data[-1, 0] == 14 * 9 * 10
    fig6 = rows(out / "fig6.csv")
    assert fig6[0] == ["optimizer", "C_E", "dE", "infidelity"]
    assert {r[0] for r in fig6[1:]} == {"sgeo", "baseline"}
    summary = json.loads((out / "summary.json").read_text())
    assert summary["seed"] == 0 and summary["version"] and summary["experiment"] == "nlse"
    assert rows(out / "groundstate.csv")[0] == ["x", "psi_gs", "psi_var"]


def test_burgers_cli_outputs(tmp_path):
    cfg = tmp_path / "b.yaml"
    cfg.write_text(FAST_BURGERS)
    out = tmp_path / "run"
    assert main(["burgers", "--config", str(cfg), "--out", str(out)]) == 0
    assert rows(out / "trajectory.csv")[0] == ["t", "grid_index", "x", "u_classical", "u_variational"]
    assert rows(out / "metrics.csv")[0] == ["t", "infidelity", "min_cost", "circuit_evals", "lambda"]
    fig3 = rows(out / "fig3.csv")
    assert fig3[0] == ["optimizer", "t", "infidelity"] and {r[0] for r in fig3[1:]} == {"sgeo", "baseline"}
    fig4 = rows(out / "fig4.csv")
    assert fig4[0] == ["optimizer", "update", "cost", "running_min", "exact_cost"]
    sg = [r for r in fig4[1:] if r[0] == "sgeo"]
    assert all(float(b) <= float(a) for a, b in zip([r[3] for r in sg], [r[3] for r in sg[1:]]))


def test_determinism_byte_identical(tmp_path):
    cfg = tmp_path / "b.yaml"
    cfg.write_text(FAST_BURGERS)
    for name in ("a", "b"):
        assert main(["burgers", "--config", str(cfg), "--out", str(tmp_path / name), "--seed", "5"]) == 0
        assert main(["nlse", "--out", str(tmp_path / name / "n"), "--seed", "5", "--no-figures"]) == 0
    for rel in ("trajectory.csv", "metrics.csv", "fig3.csv", "fig4.csv", "n/convergence.csv", "n/groundstate.csv"):
        assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes(), rel


def test_seed_changes_shot_results(tmp_path):
    for s in ("1", "2"):
        assert main(["nlse", "--out", str(tmp_path / s), "--seed", s, "--no-figures"]) == 0
    assert (tmp_path / "1" / "convergence.csv").read_bytes() != (tmp_path / "2" / "convergence.csv").read_bytes()


@pytest.mark.parametrize("problem", ["residual", "nlse", "burgers"])
def test_landscape(tmp_path, problem):
    out = tmp_path / problem
    assert main(["landscape", "--problem", problem, "--index", "2", "--out", str(out), "--exact"]) == 0
    header, data = read_csv(out / f"landscape_{problem}_j2.csv")
    assert header == ["lambda", "curve", "direct"]
    assert data.shape == (256, 3)
    assert abs(data[:, 1] - data[:, 2]).max() < 1e-9 * max(1.0, abs(data[:, 2]).max())


def test_config_errors_exit_two(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("estimator:\n  shotss: 5\n")
    assert main(["nlse", "--config", str(bad), "--out", str(tmp_path)]) == 2
    assert "shotss" in capsys.readouterr().err
    assert main(["nlse", "--config", str(tmp_path / "missing.yaml")]) == 2
    assert main(["landscape", "--index", "99", "--out", str(tmp_path)]) == 2


def test_resolved_config_round_trips(tmp_path):
    out = tmp_path / "r"
    assert main(["nlse", "--out", str(out), "--exact", "--no-figures"]) == 0
    again = tmp_path / "again"
    assert main(["nlse", "--config", str(out / "resolved_config.yaml"), "--out", str(again), "--no-figures"]) == 0
    assert (out / "convergence.csv").read_bytes() == (again / "convergence.csv").read_bytes()


def test_fmt_and_csv_round_trip(tmp_path):
    assert fmt(0.1) == "0.10000000000000001" and fmt(3) == "3" and fmt(True) == "1"
    p = write_csv(tmp_path / "x.csv", ("a", "b"), [(0.1, 1 / 3)])
    _, data = read_csv(p)
    assert data[0, 0] == 0.1 and data[0, 1] == 1 / 3
    with pytest.raises(ValueError):
        write_csv(tmp_path / "y.csv", ("a", "b"), [(1,)])
