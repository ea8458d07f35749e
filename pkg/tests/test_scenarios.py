import json

import pytest

from geolab import scenarios
from geolab.errors import SchemaError
from geolab.scenarios import (
    EXIT_OK,
    EXIT_VERIFICATION,
    PRESETS,
    Scenario,
    get_preset,
    parse_config,
    run_scenario,
)


def test_presets_validate():
    for name in PRESETS:
        s = get_preset(name)
        assert isinstance(s, Scenario)
        assert s.name == name


def test_unknown_preset():
    with pytest.raises(SchemaError):
        get_preset("nope")


def test_parse_config_dict_and_json():
    cfg = {"name": "a", "task": "splitting", "chart": "boost"}
    (s,) = parse_config(cfg)
    assert s.chart == "boost"
    (s2,) = parse_config(json.dumps(cfg))
    assert s2 == s


def test_parse_config_list_and_file(tmp_path):
    cfgs = [
        {"name": "a", "task": "splitting", "chart": "boost"},
        {"name": "b", "task": "degree", "directions": 32},
    ]
    path = tmp_path / "runs.json"
    path.write_text(json.dumps(cfgs))
    items = parse_config(path)
    assert [s.name for s in items] == ["a", "b"]


def test_parse_config_rejects_unknown_keys():
    with pytest.raises(SchemaError):
        parse_config({"name": "a", "task": "degree", "bogus": 1})
    with pytest.raises(SchemaError):
        parse_config("{not json")


def test_boost_splitting_run(tmp_path):
    s = get_preset("boost")
    out = run_scenario(s, out_dir=tmp_path)
    assert out.exit_code == EXIT_OK
    assert out.report["flags"]["beta_positive"]
    names = sorted(a.name for a in out.artifacts)
    assert names == ["boost_boost.csv", "boost_scan.json"]
    for n in names:
        assert (tmp_path / n).is_file()
    # CSV provenance header
    head = (tmp_path / "boost_boost.csv").read_text().splitlines()[:3]
    assert head[0] == "# scenario=boost"
    assert head[1] == "# seed=0"
    assert head[2].startswith("# version=")


def test_run_is_deterministic():
    s = get_preset("boost")
    a = run_scenario(s)
    b = run_scenario(s)
    assert [x.content for x in a.artifacts] == [x.content for x in b.artifacts]


def test_rn_counterexample_exits_verification():
    out = run_scenario(get_preset("rn-counterexample"))
    assert out.exit_code == EXIT_VERIFICATION
    assert out.report["v0"] is None
    assert out.report["certificate"] is not None
    assert out.report["certificate"][1] < -0.9


def test_capped_cylinder_run():
    out = run_scenario(get_preset("capped-cylinder"))
    assert out.exit_code == EXIT_OK
    assert out.report["v0"] == pytest.approx([1.0, 0.0, 0.0], abs=1e-9)


def test_degree_run():
    s = get_preset("degree").model_copy(update={"directions": 64})
    out = run_scenario(s)
    assert out.exit_code == EXIT_OK
    assert out.report["degree"] == 1


def test_level_splitting_run(tmp_path):
    s = get_preset("appendix-splitting").model_copy(update={"scan": False})
    out = run_scenario(s, out_dir=tmp_path)
    assert out.exit_code == EXIT_OK
    assert out.report["max_cross_term"] <= 1e-8
    csv = (tmp_path / "appendix-splitting_level.csv").read_text().splitlines()
    assert csv[3] == "trajectory,tau,x1,x2,t,beta,A"
