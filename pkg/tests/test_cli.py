import json

import pytest

from loghodge.cli import (ScenarioError, bundled_scenarios, emit, main,
                          normalize, parse_scenario, scenario_hash)

MINIMAL = {
    "format_version": 1,
    "p": 3, "n": 1, "r": 1, "M": 1,
    "module": {"rank": 1, "grading": None, "theta": [[]]},
    "liftings": 0,
    "filtration": {"kind": "trivial"},
    "seed": 0,
    "suites": ["cohomology"],
}


def test_minimal_parses():
    s = parse_scenario(json.dumps(MINIMAL))
    assert s["p"] == 3
    assert s["module"]["rank"] == 1


def test_nonprime_p_diagnostic():
    bad = dict(MINIMAL, p=4)
    with pytest.raises(ScenarioError, match="p not prime"):
        parse_scenario(json.dumps(bad))


def test_unknown_key_diagnostic():
    bad = dict(MINIMAL, extra=1)
    with pytest.raises(ScenarioError, match="extra"):
        parse_scenario(json.dumps(bad))


def test_bad_sparse_entry():
    bad = json.loads(json.dumps(MINIMAL))
    bad["module"]["theta"] = [[[[5], 0, 0, 1]]]  # exponent out of cap
    with pytest.raises(ScenarioError, match="theta"):
        parse_scenario(json.dumps(bad))


def test_version_mismatch():
    bad = dict(MINIMAL, format_version=2)
    with pytest.raises(ScenarioError, match="format_version"):
        parse_scenario(json.dumps(bad))


def test_roundtrip_on_bundled_corpus():
    corpus = bundled_scenarios()
    assert len(corpus) >= 3
    for name, text in corpus:
        s = parse_scenario(text)
        assert parse_scenario(emit(s)) == normalize(s), name


def test_hash_ignores_formatting():
    s1 = parse_scenario(json.dumps(MINIMAL))
    s2 = parse_scenario(json.dumps(MINIMAL, indent=4))
    assert scenario_hash(s1) == scenario_hash(s2)


def scenario_path(tmp_path, obj, name="s.json"):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


def test_run_minimal_exit_zero(tmp_path, capsys):
    rc = main(["run", "--scenario", scenario_path(tmp_path, MINIMAL)])
    out = capsys.readouterr().out
    assert rc == 0
    assert "PASS" in out


def test_input_error_exit_two(tmp_path, capsys):
    rc = main(["run", "--scenario", scenario_path(tmp_path, dict(MINIMAL, p=4))])
    assert rc == 2
    rc = main(["run", "--scenario", str(tmp_path / "missing.json")])
    assert rc == 2


def test_resource_skip_exit_three(tmp_path, capsys):
    rc = main(["cartier", "--scenario", scenario_path(tmp_path, MINIMAL),
               "--max-dim", "1"])
    assert rc == 3
    assert "SKIPPED" in capsys.readouterr().out


def test_tamper_exit_one(tmp_path, capsys):
    s = {
        "format_version": 1,
        "p": 5, "n": 1, "r": 1, "M": 1,
        "module": {"rank": 2, "grading": [1, 1],
                   "theta": [[[[0], 0, 1, 1]]]},
        "liftings": 1,
        "filtration": {"kind": "from-grading"},
        "seed": 7,
        "suites": ["cech"],
    }
    path = scenario_path(tmp_path, s)
    assert main(["cech", "--scenario", path]) == 0
    assert main(["cech", "--scenario", path, "--tamper"]) == 1


def test_json_report_deterministic(tmp_path, capsys):
    s = {
        "format_version": 1,
        "p": 5, "n": 1, "r": 1, "M": 1,
        "module": {"rank": 2, "grading": None, "theta": "random"},
        "liftings": 1,
        "filtration": {"kind": "trivial"},
        "seed": 5,
        "suites": ["cartier", "intersection", "cech"],
    }
    path = scenario_path(tmp_path, s)
    outs = []
    for k in (1, 2):
        rc = main(["run", "--scenario", path, "--json",
                   str(tmp_path / f"rep{k}.json")])
        assert rc == 0
        outs.append((tmp_path / f"rep{k}.json").read_bytes())
    assert outs[0] == outs[1]
    report = json.loads(outs[0])
    assert report["version"] == 1
    assert [s_["name"] for s_ in report["suites"]] == [
        "cartier", "intersection", "cech"]
    assert all(s_["status"] == "pass" for s_ in report["suites"])


def test_seed_override_changes_hashless_content(tmp_path):
    s = dict(MINIMAL, suites=["cohomology"])
    path = scenario_path(tmp_path, s)
    assert main(["run", "--scenario", path, "--seed", "9"]) == 0


def test_selftest_passes(capsys):
    assert main(["selftest"]) == 0
    assert "selftest" in capsys.readouterr().out
