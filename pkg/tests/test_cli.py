import json

from geolab import cli


def run_cli(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_no_command_prints_help(capsys):
    code, out, _ = run_cli([], capsys)
    assert code == 1
    assert "usage:" in out


def test_boost_preset(tmp_path, capsys):
    code, out, _ = run_cli(
        ["splitting", "--preset", "boost", "--out", str(tmp_path)], capsys
    )
    assert code == 0
    summary = json.loads(out.strip().splitlines()[-1])
    assert summary["scenario"] == "boost"
    assert summary["exit_code"] == 0
    for name in summary["artifacts"]:
        assert (tmp_path / name).is_file()


def test_verification_failure_exit_code(tmp_path, capsys):
    code, out, _ = run_cli(
        ["cone", "--preset", "rn-counterexample", "--out", str(tmp_path)], capsys
    )
    assert code == 2
    summary = json.loads(out.strip().splitlines()[-1])
    assert summary["report"]["v0"] is None


def test_preset_task_mismatch(tmp_path, capsys):
    code, _, err = run_cli(
        ["connect", "--preset", "boost", "--out", str(tmp_path)], capsys
    )
    assert code == 1
    assert "error:" in err


def test_unknown_preset(tmp_path, capsys):
    code, _, err = run_cli(
        ["degree", "--preset", "nope", "--out", str(tmp_path)], capsys
    )
    assert code == 1
    assert "error:" in err


def test_config_file_list(tmp_path, capsys):
    cfgs = [
        {"name": "d32", "task": "degree", "directions": 32},
        {"name": "d48", "task": "degree", "directions": 48},
    ]
    cfg = tmp_path / "runs.json"
    cfg.write_text(json.dumps(cfgs))
    code, out, _ = run_cli(
        ["degree", "--config", str(cfg), "--out", str(tmp_path), "--jobs", "2"],
        capsys,
    )
    assert code == 0
    lines = [json.loads(line) for line in out.strip().splitlines()]
    assert {ln["scenario"] for ln in lines} == {"d32", "d48"}
    assert (tmp_path / "d32_degree.json").is_file()
    assert (tmp_path / "d48_degree.json").is_file()


def test_config_task_mismatch(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"name": "x", "task": "degree"}))
    code, _, err = run_cli(
        ["splitting", "--config", str(cfg), "--out", str(tmp_path)], capsys
    )
    assert code == 1
    assert "error:" in err


def test_seed_override_changes_header(tmp_path, capsys):
    code, _, _ = run_cli(
        ["splitting", "--preset", "boost", "--seed", "5", "--out", str(tmp_path)],
        capsys,
    )
    assert code == 0
    head = (tmp_path / "boost_boost.csv").read_text().splitlines()
    assert head[1] == "# seed=5"
