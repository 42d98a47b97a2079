import json

import pytest

from fbmruin import __version__
from fbmruin.cli import main


def run(tmp_path, *args, name="out"):
    out = tmp_path / name
    code = main([*args, "--out", str(out)])
    return code, out


def test_minimal_ruin_prob_writes_artifacts(tmp_path):
    code, out = run(tmp_path, "ruin-prob", "--reps", "500", "--grid-n", "256")
    assert code == 0
    cfg = json.loads((out / "config.json").read_text())
    res = json.loads((out / "results.json").read_text())
    assert cfg["reps"] == 500 and cfg["hurst"] == 0.5 and cfg["command"] == "ruin-prob"
    assert res["version"] == __version__ and res["master_seed"] == 0 and "timestamp" in res
    assert (out / "results.csv").read_text().startswith("point,")


def test_bad_hurst_exit_1_names_key(tmp_path, capsys):
    code, _ = run(tmp_path, "ruin-prob", "--hurst", "1.2")
    assert code == 1
    err = capsys.readouterr().err
    assert "hurst" in err and "HurstIndex" in err


def test_unknown_config_key_exit_1(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"hurts": 0.3}))
    code, _ = run(tmp_path, "ruin-prob", "--config", str(cfg))
    assert code == 1 and "hurts" in capsys.readouterr().err


def test_bad_flag_exit_1(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["ruin-prob", "--reps", "many"])
    assert exc.value.code == 1


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"hurst": 0.7, "u": 0.5, "reps": 300, "grid_n": 128, "seed": 9}))
    code, out = run(tmp_path, "ruin-prob", "--config", str(cfg), "--u", "0.4")
    assert code == 0
    resolved = json.loads((out / "config.json").read_text())
    assert resolved["hurst"] == 0.7 and resolved["u"] == 0.4 and resolved["seed"] == 9


def test_resolved_config_reruns_identically(tmp_path):
    code, first = run(tmp_path, "losses", "--reps", "2000", "--grid-n", "256", "--seed", "3", name="a")
    assert code == 0
    code, second = run(tmp_path, "losses", "--config", str(first / "config.json"), name="b")
    assert code == 0
    a = json.loads((first / "results.json").read_text())
    b = json.loads((second / "results.json").read_text())
    a.pop("timestamp"), b.pop("timestamp")
    assert a == b


def test_infeasible_exit_2(tmp_path):
    code, _ = run(tmp_path, "ruin-prob", "--reps", "100", "--u", "5", "--grid-n", "128")
    assert code == 2
    code, _ = run(tmp_path, "ruin-time", "--reps", "100", "--u", "1.5", "--grid-n", "128", name="b")
    assert code == 2


def test_invariant_breach_exit_3(tmp_path, monkeypatch):
    from fbmruin import cli
    from fbmruin.errors import NegativeEigenvalue

    def boom(cfg):
        raise NegativeEigenvalue("synthetic")

    monkeypatch.setattr(cli, "cmd_ruin_prob", boom)
    code, _ = run(tmp_path, "ruin-prob")
    assert code == 3


def test_long_ruin_time_emits_truncated_normal_table(tmp_path):
    code, out = run(tmp_path, "ruin-time", "--gamma", "0.3", "--reps", "4000", "--grid-n", "512")
    assert code == 0
    res = json.loads((out / "results.json").read_text())["results"]
    assert res["law"]["kind"] == "TruncatedNormal"
    assert (out / "results.csv").read_text().splitlines()[0] == "y,empirical_cdf,law_cdf"


def test_short_ruin_time_emits_exponential(tmp_path):
    code, out = run(tmp_path, "ruin-time", "--gamma", "0.3", "--scenario", "short", "--horizon-scale", "1",
                    "--u", "1", "--reps", "3000", "--grid-n", "256")
    assert code == 0
    assert json.loads((out / "results.json").read_text())["results"]["law"]["kind"] == "UnitExponential"


def test_constants_subcommands(tmp_path):
    code, out = run(tmp_path, "constants", "--kind", "piterbarg", "--alpha", "2", "--b", "0.5,1",
                    "--S", "5", "--reps", "300")
    assert code == 0
    rows = json.loads((out / "results.json").read_text())["results"]["estimates"]
    assert [r["b"] for r in rows] == [0.5, 1.0] and rows[0]["quadrature_at_S"] > 1
    code, out = run(tmp_path, "constants", "--kind", "pickands", "--alpha", "1", "--S", "2", "--reps", "100",
                    name="p1")
    assert code == 0
    row = json.loads((out / "results.json").read_text())["results"]["estimates"][0]
    assert row["closed_form"] == 1.0


@pytest.mark.parametrize("task,header", [("sweep", "status"), ("landscape", "s,t,V2"), ("residuals", "radius"),
                                         ("max", "s,t,v")])
def test_field_tasks(tmp_path, task, header):
    extra = ["--s-points", "50"] if task == "sweep" else ["--resolution", "100"]
    code, out = run(tmp_path, "field", "--task", task, *extra)
    assert code == 0
    assert (out / "results.csv").read_text().startswith(header)


def test_compare_ladders(tmp_path):
    code, out = run(tmp_path, "compare", "--ladder", "gamma-ratio", "--gamma", "0.5", "--scenario", "intermediate",
                    "--s0", "0.5", "--u-values", "1", "--reps", "2000", "--grid-n", "128")
    assert code == 0
    code, out = run(tmp_path, "compare", "--ladder", "phi", "--gamma", "0.3", "--u", "1", "--x-values=-1,0,1",
                    "--reps", "2000", "--grid-n", "512", name="phi")
    assert code == 0
    assert len((out / "results.csv").read_text().splitlines()) == 4
