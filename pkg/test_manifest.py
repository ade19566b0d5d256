"""Manifest parsing, validation messages and option layering."""

from fractions import Fraction

import pytest

from libs.errors import InputError, ManifestError, UninstantiatedParameterError
from libs.manifest import Options, manifest_issues, parse_manifest, parse_param_overrides
from conftest import MANIFEST_DIR

MARTINET_WITH_TYPO = """
name: broken
space:
  dimension: 3
frame:
  X1: ["1", "0", "0"]
  X2: ["0", "1", "x1^^2/2"]
"""


def read(name):
    return (MANIFEST_DIR / f"{name}.yml").read_text(encoding="utf-8")


def test_martinet_manifest(martinet):
    assert martinet.name == "martinet"
    assert martinet.dimension == 3
    assert martinet.rank == 2
    assert martinet.coordinates == ("x1", "x2", "x3")
    assert martinet.frame_names == ("X1", "X2")
    assert martinet.points["regular"] == (1, 0, 0)
    assert martinet.submanifold("N").zeroed == (0,)
    assert martinet.volume.at([3, 4, 5]) == 1
    assert martinet.sources["frame"]["X2"] == ["0", "1", "x1^2/2"]


def test_inline_points_and_unknown_names(martinet):
    assert martinet.point("origin") == (0, 0, 0)
    assert martinet.point("1/2,0,0") == (Fraction(1, 2), 0, 0)
    assert martinet.point("(1, 2, 3)") == (1, 2, 3)
    with pytest.raises(InputError):
        martinet.point("nowhere")
    with pytest.raises(InputError):
        martinet.point("1,x,0")
    with pytest.raises(InputError, match="unknown submanifold"):
        martinet.submanifold("M")


def test_submanifolds_through_a_point(martinet):
    assert [s.name for s in martinet.submanifolds_through((0, 1, 0))] == ["N"]
    assert martinet.submanifolds_through((1, 0, 0)) == []


def test_parameter_must_be_bound():
    with pytest.raises(UninstantiatedParameterError, match="parameter k requires a value"):
        parse_manifest(read("r5_single_stratum"))
    manifest = parse_manifest(read("r5_single_stratum"), {"k": 4})
    assert manifest.parameters == {"k": 4}
    with pytest.raises(InputError, match="no such parameter"):
        parse_manifest(read("martinet"), {"k": 3})


def test_param_overrides():
    assert parse_param_overrides(["k=3", " j = 2"]) == {"k": 3, "j": 2}
    assert parse_param_overrides(None) == {}
    for bad in (["k"], ["=3"], ["k=three"]):
        with pytest.raises(InputError):
            parse_param_overrides(bad)


def test_expression_errors_carry_their_location():
    with pytest.raises(ManifestError) as info:
        parse_manifest(MARTINET_WITH_TYPO)
    assert info.value.location == "frame.X2[3]"
    assert str(info.value).startswith("frame.X2[3]: ")
    assert "at offset 3" in str(info.value)


def test_manifest_issues_collects_every_problem():
    text = MARTINET_WITH_TYPO.replace('"0", "0"]', '"0", "y9"]') + "point.p: [0, 0]\nextra: 1\n"
    issues = manifest_issues(text)
    assert len(issues) == 4
    assert any(issue.startswith("frame.X1[3]") for issue in issues)
    assert any(issue.startswith("frame.X2[3]") for issue in issues)
    assert any(issue.startswith("point.p") for issue in issues)
    assert any("unknown section 'extra'" in issue for issue in issues)
    assert manifest_issues(read("martinet")) == []


def test_duplicate_names_are_rejected():
    text = read("martinet") + "point.origin: [0, 0, 1]\n"
    with pytest.raises(ManifestError, match="duplicate name 'point.origin'"):
        parse_manifest(text)


def test_rank_must_be_below_dimension():
    text = """
space:
  dimension: 2
frame:
  X1: ["1", "0"]
  X2: ["0", "1"]
"""
    with pytest.raises(ManifestError, match=r"rank must be < dimension \(rank 2, dimension 2\)"):
        parse_manifest(text)


def test_non_immersed_submanifold():
    text = read("martinet") + "submanifold.C:\n  parameters: [t]\n  map: [\"0\", \"t^2\", \"0\"]\n"
    assert parse_manifest(text).submanifold("C").dim == 1
    flat = read("martinet") + "submanifold.F:\n  parameters: [t, s]\n  map: [\"0\", \"t + s\", \"0\"]\n"
    with pytest.raises(ManifestError) as info:
        parse_manifest(flat)
    assert info.value.location == "submanifold.F"


def test_parametrized_submanifold():
    text = read("martinet") + "submanifold.D:\n  parameters: [t]\n  map: [\"0\", \"t\", \"2*t\"]\n"
    line = parse_manifest(text).submanifold("D")
    assert line.params_of([0, 1, 2]) == (1,)
    assert not line.contains([0, 1, 1])


def test_invalid_yaml():
    with pytest.raises(ManifestError, match="invalid YAML"):
        parse_manifest("space: [1, 2\n")


def test_options_layering():
    options = Options.layered({"samples": 4, "probe": {"samples": 100}},
                              {"samples": 6, "cap_order": None, "probe": {"rho": 0.5}},
                              {"cap-step": 5})
    assert options.samples == 6
    assert options.cap_step == 5
    assert options.cap_order is None
    assert options.probe == {"samples": 100, "rho": 0.5}
    with pytest.raises(ManifestError, match="unknown option"):
        Options().merged({"colour": "red"})
    with pytest.raises(ManifestError):
        Options().merged({"samples": 0})
    with pytest.raises(ManifestError):
        Options().merged({"format": "xml"})


def test_manifest_options_are_validated():
    text = read("martinet") + "options:\n  cap_step: -1\n"
    with pytest.raises(ManifestError, match="cap_step"):
        parse_manifest(text)
