import json
import os

import pytest

from ricci_compare import cli
from ricci_compare import comparison
from ricci_compare.errors import ConfigError, NumericalFailure
from ricci_compare.gallery import BUILTINS, Scenario, builtin_config, list_builtins


def _write(tmp_path, doc, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def test_catalog_has_six_entries():
    cat = list_builtins()
    assert set(cat) == {"euclidean", "sphere", "hyperbolic", "gaussian", "log-weight", "cheng-model"}
    for entry in cat.values():
        assert {"description", "params", "n", "m", "kappa", "checks"} <= set(entry)


def test_config_round_trip():
    for name in BUILTINS:
        scn = Scenario.from_dict(builtin_config(name))
        again = Scenario.from_dict(scn.to_dict())
        assert again.to_dict() == scn.to_dict()


@pytest.mark.parametrize("name", sorted(BUILTINS))
def test_builtin_defaults_pass(name, tmp_path):
    code = cli.main(["run", _write(tmp_path, builtin_config(name)), "--out", str(tmp_path / "out")])
    assert code == 0
    files = os.listdir(tmp_path / "out")
    assert "summary.csv" in files and "config.json" in files and "profile.csv" in files
    if name == "cheng-model":
        assert "maximal_model.csv" in files


def test_missing_n_is_config_error(tmp_path, capsys):
    doc = builtin_config("sphere")
    del doc["n"]
    assert cli.main(["run", _write(tmp_path, doc)]) == 2
    assert "n" in capsys.readouterr().err


def test_bad_json_reports_position(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"n": 3,\n "m": }')
    assert cli.main(["run", str(path)]) == 2
    err = capsys.readouterr().err
    assert "line 2" in err


@pytest.mark.parametrize(
    "patch,field",
    [({"m": 2}, "m"), ({"checks": ["nope"]}, "checks[0]"), ({"grid": {"size": 1}}, "grid.size"), ({"extra": 1}, "extra")],
)
def test_field_diagnostics(patch, field):
    doc = builtin_config("euclidean")
    doc.update(patch)
    with pytest.raises(ConfigError) as info:
        Scenario.from_dict(doc)
    assert info.value.field == field


def test_cheng_only_checks_are_rejected_elsewhere():
    doc = builtin_config("sphere")
    doc["checks"] = ["equality"]
    with pytest.raises(ConfigError):
        Scenario.from_dict(doc)


def test_gaussian_ambrose_is_not_implied(tmp_path):
    doc = builtin_config("gaussian")
    doc["checks"] = ["ambrose", "completeness"]
    summary = cli.run(Scenario.from_dict(doc))
    assert summary.exit_code == 0
    v = summary.verdicts()
    assert v["ambrose"] == "Divergent,NotImplied"
    assert v["completeness"].startswith("Convergent")


def test_repeated_runs_are_byte_identical(tmp_path):
    path = _write(tmp_path, builtin_config("gaussian"))
    outs = []
    for k, jobs in enumerate(("1", "3")):
        out = tmp_path / f"o{k}"
        assert cli.main(["run", path, "--out", str(out), "--jobs", jobs]) == 0
        outs.append({f: (out / f).read_bytes() for f in sorted(os.listdir(out))})
    assert outs[0] == outs[1]


def test_numerical_failure_exit_code(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise NumericalFailure("forced")

    monkeypatch.setattr(comparison, "check_laplacian_comparison", boom)
    doc = builtin_config("euclidean")
    doc["checks"] = ["laplacian", "volume_element"]
    assert cli.main(["run", _write(tmp_path, doc)]) == 3


def test_allow_inconclusive(tmp_path):
    doc = builtin_config("euclidean")
    doc["checks"] = ["myers"]
    path = _write(tmp_path, doc)
    assert cli.main(["run", path]) == 1
    assert cli.main(["run", path, "--allow-inconclusive"]) == 0


def test_violation_exit_code(tmp_path):
    doc = builtin_config("gaussian")
    doc["kappa"] = {"kind": "constant", "value": 1.0}
    doc["checks"] = ["ricci_hypothesis"]
    assert cli.main(["run", _write(tmp_path, doc)]) == 1


def test_overrides(tmp_path):
    path = _write(tmp_path, builtin_config("euclidean"))
    assert cli.main(["run", path, "--grid", "1"]) == 2
    assert cli.main(["run", path, "--tol", "-1"]) == 2
    assert cli.main(["run", path, "--jobs", "0"]) == 2
    out = tmp_path / "o"
    assert cli.main(["run", path, "--grid", "300", "--tol", "1e-7", "--out", str(out)]) == 0
    echoed = json.loads((out / "config.json").read_text())
    assert echoed["grid"]["size"] == 300


def test_summary_columns(tmp_path):
    out = tmp_path / "o"
    cli.main(["run", _write(tmp_path, builtin_config("sphere")), "--out", str(out)])
    lines = (out / "summary.csv").read_text().splitlines()
    assert lines[1].split(",") == list(cli.SUMMARY_COLUMNS)


def test_list_builtins(capsys):
    assert cli.main(["list-builtins"]) == 0
    text = capsys.readouterr().out
    assert "cheng-model" in text and "gaussian" in text
    assert cli.main(["list-builtins", "--json"]) == 0
    assert set(json.loads(capsys.readouterr().out)) == set(BUILTINS)


def test_module_entry_point():
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "ricci_compare", "list-builtins", "--json"], capture_output=True, text=True)
    assert res.returncode == 0 and "sphere" in res.stdout
