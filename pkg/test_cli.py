"""Command-line entry point: exit codes, report formats and validation output."""

import json

import pytest

import sr_cli
from conftest import ROOT


@pytest.fixture(autouse=True)
def in_repo_root(monkeypatch):
    monkeypatch.chdir(ROOT)


def run_json(capsys, *argv):
    code = sr_cli.main(list(argv) + ["--format", "machine"])
    return code, json.loads(capsys.readouterr().out)


def fields_of(document, kind):
    return [s["fields"] for s in document["sections"] if s["kind"] == kind]


def test_no_command_prints_help(capsys):
    assert sr_cli.main([]) == 1
    assert "Available commands" in capsys.readouterr().out


def test_flags_at_an_inline_point(capsys):
    code, document = run_json(capsys, "flags", "manifests/martinet.yml", "--point", "1,0,0")
    assert code == 0
    growth = fields_of(document, "growth")[0]
    assert growth["growth_vector"]["value"] == [2, 3]
    assert growth["classification"]["value"] == "Regular"
    assert document["manifest"]["name"] == "martinet"


def test_verdict_json(capsys, tmp_path):
    out = tmp_path / "martinet.json"
    code, document = run_json(capsys, "verdict", "manifests/martinet.yml", "--point", "origin",
                              "--out", str(out))
    assert code == 0
    assert document["status"] == "ok"
    verdict = fields_of(document, "verdict")[0]
    assert verdict["finiteness"]["value"] == "Infinite"
    assert verdict["certificate"]["value"] == "corank-shortcut: 0 <= 4 - 4 < 1"
    assert json.loads(out.read_text(encoding="utf-8")) == document


def test_verdict_text_report(capsys):
    code = sr_cli.main(["verdict", "manifests/r4_double_martinet.yml", "--point", "origin"])
    text = capsys.readouterr().out
    assert code == 0
    assert "finiteness: Finite (sampled A2)  [sampled]" in text
    assert "certificate: sigma-criterion: 1 <= 1" in text


def test_parameter_binding(capsys):
    code, document = run_json(capsys, "verdict", "manifests/r5_corank_two.yml", "--point", "origin",
                              "--param", "k=3")
    assert code == 0
    assert fields_of(document, "verdict")[0]["certificate"]["value"] == "sigma-criterion: 2 > 1"
    assert document["manifest"]["parameters"] == {"k": 3}


def test_order_cap_zero_is_inconclusive(capsys):
    code, document = run_json(capsys, "verdict", "manifests/r4_double_martinet.yml", "--point", "origin",
                              "--cap-order", "0")
    assert code == 2
    assert document["status"] == "inconclusive"
    assert fields_of(document, "order")[0]["sigma_minus"]["value"] == ">0"


def test_strata(capsys):
    code, document = run_json(capsys, "strata", "manifests/martinet.yml", "--submanifold", "N")
    assert code == 0
    dimension = fields_of(document, "dimension")[0]
    assert dimension["dim_H"]["value"] == 4
    assert dimension["strata"]["value"] == {"regular": 4, "N": 4}


def test_sigma_with_nu(capsys):
    code, document = run_json(capsys, "sigma", "manifests/r5_single_stratum.yml", "--submanifold", "N",
                              "--param", "k=4", "--point", "0,1,0,0,0")
    assert code == 0
    assert fields_of(document, "order")[0]["sigma"]["value"] == 3
    assert [s["kind"] for s in document["sections"]] == ["order", "nu"]


def test_sigma_needs_a_submanifold(capsys):
    assert sr_cli.main(["sigma", "manifests/martinet.yml"]) == 1
    assert "sigma needs --submanifold" in capsys.readouterr().err


def test_nilpotent_chart(capsys):
    code, document = run_json(capsys, "nilpotent", "manifests/martinet.yml", "--point", "origin",
                              "--submanifold", "N")
    assert code == 0
    chart = fields_of(document, "nilpotent")[0]
    assert chart["weights"]["value"] == [1, 3, 1]
    assert chart["hat_volume_scalar"]["value"] == "1"


def test_dimension_probe_writes_csv(capsys, tmp_path):
    code, document = run_json(capsys, "probe", "manifests/martinet.yml", "--point", "regular",
                              "--kind", "dimension", "--csv-dir", str(tmp_path))
    assert code == 0
    probe = fields_of(document, "probe-dimension")[0]
    assert probe["exact_reference"]["value"] == 4
    assert probe["exponent"]["provenance"] == "probe"
    assert (tmp_path / "martinet_regular_dimension.csv").exists()


def test_validate_manifest(capsys):
    assert sr_cli.main(["validate-manifest", "manifests/r5_single_stratum.yml"]) == 1
    out = capsys.readouterr().out
    assert "X Manifest validation failed:" in out
    assert "parameter k requires a value" in out
    assert sr_cli.main(["validate-manifest", "manifests/r5_single_stratum.yml", "--param", "k=3"]) == 0
    assert "SUCCESS: Manifest is valid!" in capsys.readouterr().out


def test_missing_manifest(capsys):
    assert sr_cli.main(["flags", "manifests/missing.yml"]) == 1
    assert "does not exist" in capsys.readouterr().err
    assert sr_cli.main(["validate-manifest", "manifests/missing.yml"]) == 1


def test_square_frame_is_rejected(capsys, tmp_path):
    path = tmp_path / "square.yml"
    path.write_text("space:\n  dimension: 2\nframe:\n  X1: [\"1\", \"0\"]\n  X2: [\"0\", \"1\"]\n",
                    encoding="utf-8")
    assert sr_cli.main(["flags", str(path), "--point", "0,0"]) == 1
    assert "rank must be < dimension" in capsys.readouterr().err


def test_singular_point_without_stratum(capsys, tmp_path):
    path = tmp_path / "bare.yml"
    text = (ROOT / "manifests" / "martinet.yml").read_text(encoding="utf-8")
    path.write_text(text.replace("submanifold.N:\n  zero: [x1]\n", ""), encoding="utf-8")
    assert sr_cli.main(["verdict", str(path), "--point", "origin"]) == 1
    assert "singular" in capsys.readouterr().err
