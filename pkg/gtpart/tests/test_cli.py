import json

import pytest
from typer.testing import CliRunner

from gtpart import config as cfgmod
from gtpart.cli import app

runner = CliRunner()


@pytest.fixture(autouse=True)
def isolated_config(tmp_path, monkeypatch):
    monkeypatch.setattr(cfgmod, "CONFIG_PATH", tmp_path / "cfg" / "config.json")
    for env in cfgmod.ENV_KEYS:
        monkeypatch.delenv(env, raising=False)


@pytest.fixture
def instance(tmp_path):
    root = tmp_path / "inst"
    result = runner.invoke(
        app, ["synth", "--k", "2", "--m", "5", "--l", "2", "--d", "2", "--out", str(root)]
    )
    assert result.exit_code == 0, result.output
    return root


def error_of(result):
    line = next(s for s in result.output.splitlines() if s.startswith('{"error"'))
    return json.loads(line)["error"]


def test_synth_writes_three_files(instance):
    pool = (instance / "pool.csv").read_text().splitlines()
    assert pool[0] == "id,f1,f2"
    assert len(pool) == 1 + 12
    assert len((instance / "targets.csv").read_text().splitlines()) == 1 + 2
    labels = (instance / "labels.csv").read_text().splitlines()
    assert labels[0] == "id,team"
    assert sum(1 for row in labels[1:] if row.endswith(",noise")) == 2


def test_solve_writes_report(instance, tmp_path):
    out = tmp_path / "report.json"
    args = ["solve", "--pool", str(instance / "pool.csv"), "--targets"]
    args += [str(instance / "targets.csv"), "--l", "2", "--out", str(out), "--no-timing"]
    result = runner.invoke(app, args)
    assert result.exit_code == 0, result.output
    assert "guided_split: cost" in result.output
    doc = json.loads(out.read_text(encoding="utf-8"))
    assert doc["schema_version"] == "1"
    assert len(doc["removed_ids"]) == 2
    assert doc["wall_time_s"] == 0.0
    assert doc["config"]["target_method"] == "file"
    assert doc["config"]["solver"]["cis_method"] == "cvx"


def test_solve_prints_json_to_stdout(instance):
    args = ["solve", "--pool", str(instance / "pool.csv"), "--k", "2", "--algo", "random"]
    result = runner.invoke(app, [*args, "--target-method", "sample", "--seed", "4"])
    assert result.exit_code == 0, result.output
    doc = json.loads(result.output)
    assert doc["algorithm"] == "random"
    assert doc["seed"] == 4
    assert set(doc["assignment"].values()) <= {1, 2}


def test_solve_is_byte_identical_on_rerun(instance, tmp_path):
    outs = []
    for name in ("a.json", "b.json"):
        args = ["solve", "--pool", str(instance / "pool.csv"), "--targets"]
        args += [str(instance / "targets.csv"), "--l", "1", "--no-timing"]
        result = runner.invoke(app, [*args, "--out", str(tmp_path / name)])
        assert result.exit_code == 0, result.output
        outs.append((tmp_path / name).read_bytes())
    assert outs[0] == outs[1]


def test_unknown_algorithm_lists_valid_names(instance):
    args = ["solve", "--pool", str(instance / "pool.csv"), "--k", "2", "--algo", "spectral"]
    result = runner.invoke(app, args)
    assert result.exit_code == 2
    err = error_of(result)
    assert err["code"] == "unknown_algorithm"
    assert "guided_split" in err["valid"]


def test_missing_pool_file(tmp_path):
    result = runner.invoke(app, ["solve", "--pool", str(tmp_path / "none.csv"), "--k", "2"])
    assert result.exit_code == 2
    assert error_of(result)["code"] == "parse"


def test_undecodable_pool_is_a_parse_error(tmp_path):
    (tmp_path / "pool.csv").write_bytes(b"id,f1\n\xff\xfe,1.0\nb,2.0\n")
    result = runner.invoke(app, ["solve", "--pool", str(tmp_path / "pool.csv"), "--k", "1"])
    assert result.exit_code == 2
    err = error_of(result)
    assert err["code"] == "parse"
    assert err["line"] == 2


def test_solve_needs_k_without_targets(instance):
    result = runner.invoke(app, ["solve", "--pool", str(instance / "pool.csv")])
    assert result.exit_code == 2
    assert error_of(result)["code"] == "validation"


def test_bench_exports_rows_and_summary(tmp_path):
    def bench(out):
        args = ["bench", "--values", "0,2", "--algo", "guided_split", "--algo", "random"]
        args += ["--n", "20", "--k", "2", "--d", "2", "--reps", "2", "--cis-method", "greedy"]
        return runner.invoke(app, [*args, "--no-timing", "--out", str(out)])

    result = bench(tmp_path / "a.csv")
    assert result.exit_code == 0, result.output
    assert "Exported 8 rows" in result.output
    lines = (tmp_path / "a.csv").read_text().splitlines()
    assert lines[0] == "sweep_value,algorithm,repetition,cost,wall_time_s,seed,error"
    assert len(lines) == 9
    assert (tmp_path / "a_summary.csv").exists()

    assert bench(tmp_path / "b.csv").exit_code == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_bench_rejects_bad_values(tmp_path):
    result = runner.invoke(app, ["bench", "--values", "0,x", "--out", str(tmp_path / "r.csv")])
    assert result.exit_code == 2
    assert error_of(result)["code"] == "validation"


def test_bench_checks_sweep_against_pool_file(tmp_path):
    (tmp_path / "pool.csv").write_text("id,f1\na,0\nb,1\nc,2\n")
    args = ["bench", "--values", "0,2", "--k", "2", "--pool", str(tmp_path / "pool.csv")]
    args += ["--target-method", "mean", "--out", str(tmp_path / "r.csv")]
    result = runner.invoke(app, args)
    assert result.exit_code == 2
    err = error_of(result)
    assert err["code"] == "validation"
    assert "n=3" in err["message"]
    assert not (tmp_path / "r.csv").exists()


def test_oracle_counter_example(tmp_path):
    (tmp_path / "pool.csv").write_text("id,f1,f2\na,1,0\nb,-1,0\nc,-1,20\n")
    (tmp_path / "targets.csv").write_text("t_id,f1,f2\nt1,0,0\nt2,-1,10\n")
    args = ["oracle", "--pool", str(tmp_path / "pool.csv"), "--targets"]
    result = runner.invoke(app, [*args, str(tmp_path / "targets.csv"), "--problem", "cp"])
    assert result.exit_code == 0, result.output
    doc = json.loads(result.output)
    assert doc["optimum"] == pytest.approx(1.0)
    assert doc["assignment"] == {"a": 1, "b": 2, "c": 2}
    assert doc["enumerated"] == 8


def test_oracle_cis_and_guard(tmp_path):
    (tmp_path / "pool.csv").write_text("id,f1\na,1\nb,2\nc,3\nd,9\n")
    (tmp_path / "t.csv").write_text("t_id,f1\nt1,2\n")
    args = ["oracle", "--pool", str(tmp_path / "pool.csv"), "--targets", str(tmp_path / "t.csv")]
    result = runner.invoke(app, [*args, "--problem", "cis", "--l", "1"])
    assert result.exit_code == 0, result.output
    doc = json.loads(result.output)
    assert doc["optimum"] == 0.0
    assert doc["removed_ids"] == ["d"]

    rows = "".join(f"p{i},{i}\n" for i in range(30))
    (tmp_path / "big.csv").write_text("id,f1\n" + rows)
    args = ["oracle", "--pool", str(tmp_path / "big.csv"), "--k", "2", "--problem", "cp"]
    result = runner.invoke(app, args)
    assert result.exit_code == 2
    assert error_of(result)["code"] == "size_guard"


def test_config_saves_and_validates():
    result = runner.invoke(app, ["config", "--cis-method", "greedy", "--workers", "3"])
    assert result.exit_code == 0, result.output
    saved = json.loads(cfgmod.CONFIG_PATH.read_text(encoding="utf-8"))
    assert saved["cis_method"] == "greedy"
    assert saved["workers"] == 3

    result = runner.invoke(app, ["config", "--cis-method", "simplex"])
    assert result.exit_code == 2
    assert json.loads(cfgmod.CONFIG_PATH.read_text(encoding="utf-8"))["cis_method"] == "greedy"


def test_unknown_log_level(instance):
    result = runner.invoke(app, ["--log-level", "loud", "synth", "--out", str(instance)])
    assert result.exit_code == 2
