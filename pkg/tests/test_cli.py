import json

import pytest

from tgw.cli import config_from_args, exit_code_for, main, run


def capture(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_types_example(capsys):
    code, rep = capture(capsys, ["types", "--theory", "dlo", "--vars", "2"])
    assert code == 0
    assert rep["items"]["count"] == 3
    assert rep["schema_version"] == 1


def test_groupoid_verify_all_pass(capsys):
    code, rep = capture(capsys, ["groupoid", "verify", "--theory", "pureset",
                                 "--level", "1"])
    assert code == 0
    assert all(c["passed"] for c in rep["certificates"])


def test_compose_example(capsys):
    code, rep = capture(capsys, ["compose", "--theory", "pureset",
                                 "--phi", "eq(x0,y0)", "--psi", "eq(y0,z1)"])
    assert code == 0
    assert rep["items"]["chi"] == "eq(x0,z1)"
    assert rep["certificates"][0]["name"] == "level-table-cross-check"


def test_determinism_minus_timing(capsys):
    argv = ["reconstruct", "--theory", "dlo", "--level", "1", "--depth", "1",
            "--budget", "4"]
    _, a = capture(capsys, argv)
    _, b = capture(capsys, argv)
    a.pop("timing_ms")
    b.pop("timing_ms")
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_usage_errors():
    with pytest.raises(SystemExit) as exc:
        main(["types", "--theory", "nosuch", "--vars", "2"])
    assert exc.value.code == 2
    assert main(["skolem", "--theory", "dlo", "--formula", "lt(x0"]) == 2


def test_resource_cap_exit_code():
    assert main(["types", "--theory", "randomgraph", "--vars", "9",
                 "--tapes", "2"]) == 3


def test_json_output(tmp_path, capsys):
    path = tmp_path / "report.json"
    code = main(["dphi", "--theory", "pureset", "--level", "1",
                 "--json", str(path)])
    capsys.readouterr()
    assert code == 0
    saved = json.loads(path.read_text())
    assert saved["command"] == "dphi"
    assert saved["items"]["raw"] == "forall y0. (true -> true)"


def test_config_file_with_overrides(tmp_path):
    cfgfile = tmp_path / "cfg.json"
    cfgfile.write_text(json.dumps({"command": "types", "theory": "dlo",
                                   "vars": 2}))
    cfg = config_from_args(["--config", str(cfgfile), "types", "--vars", "3"])
    assert cfg["vars"] == 3 and cfg["theory"] == "dlo"
    rep = run(cfg)
    assert rep["items"]["count"] == 13


def test_config_rejects_unknown_fields():
    from tgw.errors import PreconditionError
    with pytest.raises(PreconditionError, match="unknown config fields"):
        run({"command": "types", "theory": "dlo", "vars": 2, "bogus": 1})


def test_exit_code_contract():
    rep = {"certificates": [{"name": "a", "passed": True},
                            {"name": "b", "passed": False}]}
    assert exit_code_for(rep) == 1
    rep["certificates"][1]["passed"] = True
    assert exit_code_for(rep) == 0


def test_model_dump(capsys):
    code, rep = capture(capsys, ["model", "dump", "--theory", "randomgraph",
                                 "--size", "4"])
    assert code == 0
    assert len(rep["items"]["carrier"]) == 4
    assert "adj" in rep["items"]["atoms"]
