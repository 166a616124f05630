import json

import pytest

from psopt.cli import main


def write_config(tmp_path, cfg, name="exp.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def quad_config(**overrides):
    cfg = {
        "objective": {"kind": "quadratic", "dim": 2},
        "optimizer": {"kind": "sps"},
        "steps": 3,
        "seed": 1,
    }
    cfg.update(overrides)
    return cfg


def test_list_exits_zero(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    assert "ps_da_sgd" in out and "quadratic" in out


def test_unknown_flag_exits_two():
    with pytest.raises(SystemExit) as exc:
        main(["run", "--confg", "x.json"])
    assert exc.value.code == 2


def test_config_flag_without_value_exits_two():
    with pytest.raises(SystemExit) as exc:
        main(["run", "--config"])
    assert exc.value.code == 2


def test_run_writes_trace_and_summary(tmp_path, capsys):
    cfg_path = write_config(tmp_path, quad_config())
    out_dir = tmp_path / "results"
    assert main(["run", "--config", cfg_path, "--out", str(out_dir)]) == 0
    traces = list(out_dir.glob("trace_*.csv"))
    summaries = list(out_dir.glob("summary_*.json"))
    assert len(traces) == 1 and len(summaries) == 1
    assert traces[0].read_text().startswith("step,loss,lr,d,")
    summary = json.loads(summaries[0].read_text())
    assert set(summary) >= {"config_hash", "final_loss", "min_loss", "steps",
                            "success"}


def test_run_is_deterministic_across_invocations(tmp_path):
    cfg_path = write_config(tmp_path, quad_config(
        optimizer={"kind": "ps_da_sgd", "mu": 0.9},
        scaling={"rule": "adam"}, steps=20))
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "--config", cfg_path, "--out", str(out_a)]) == 0
    assert main(["run", "--config", cfg_path, "--out", str(out_b)]) == 0
    ta = next(out_a.glob("trace_*.csv")).read_bytes()
    tb = next(out_b.glob("trace_*.csv")).read_bytes()
    assert ta == tb


def test_run_unknown_optimizer_exits_two(tmp_path, capsys):
    cfg = quad_config()
    cfg["optimizer"]["kind"] = "cocob"
    cfg_path = write_config(tmp_path, cfg)
    with pytest.raises(SystemExit) as exc:
        main(["run", "--config", cfg_path, "--out", str(tmp_path / "o")])
    assert exc.value.code == 2
    assert "optimizer" in capsys.readouterr().err


def test_run_typo_field_exits_two_with_path(tmp_path, capsys):
    cfg = quad_config()
    cfg["optimizer"]["lr"] = 0.1
    cfg_path = write_config(tmp_path, cfg)
    with pytest.raises(SystemExit) as exc:
        main(["run", "--config", cfg_path, "--out", str(tmp_path / "o")])
    assert exc.value.code == 2
    assert "optimizer.lr" in capsys.readouterr().err


def test_run_nan_exits_one_with_partial_trace(tmp_path):
    cfg = quad_config(optimizer={"kind": "sgd", "eta": 10.0},
                      objective={"kind": "quadratic", "dim": 2, "cond": 1e4},
                      steps=500)
    cfg_path = write_config(tmp_path, cfg)
    out_dir = tmp_path / "o"
    assert main(["run", "--config", cfg_path, "--out", str(out_dir)]) == 1
    trace = next(out_dir.glob("trace_*.csv"))
    assert len(trace.read_text().splitlines()) >= 2


def test_missing_config_file_exits_two(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["run", "--config", str(tmp_path / "nope.json"),
              "--out", str(tmp_path)])
    assert exc.value.code == 2


def test_sweep_prints_table(tmp_path, capsys):
    cfg_path = write_config(tmp_path, [quad_config(), quad_config(seed=3)])
    assert main(["sweep", "--config", cfg_path,
                 "--out", str(tmp_path / "sw")]) == 0
    out = capsys.readouterr().out
    assert "optimizer" in out and "sps" in out
    results = json.loads((tmp_path / "sw" / "sweep_results.json").read_text())
    assert len(results) == 2


def test_invariants_all_pass_exits_zero(capsys):
    assert main(["invariants", "--suite", "naive-substitution"]) == 0
    assert "PASS" in capsys.readouterr().out


def test_invariants_unknown_suite_exits_two():
    with pytest.raises(SystemExit) as exc:
        main(["invariants", "--suite", "bogus"])
    assert exc.value.code == 2


def test_gradcheck_exits_zero(capsys):
    assert main(["gradcheck", "--points", "3"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 4
