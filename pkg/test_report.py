"""Report sections, provenance tags and deterministic serialization."""

import json
from fractions import Fraction

import numpy as np

from libs.flags import PointClass
from libs.orders import AboveCap
from libs.report import (EXACT, PROBE, SAMPLED, Report, Section, assessment_sections, plain,
                         tagged)
from libs.verdict import Finiteness, assess_point


def test_plain_renders_exact_values():
    assert plain(Fraction(1, 2)) == "1/2"
    assert plain(Fraction(4, 2)) == "2"
    assert plain(AboveCap(3)) == ">3"
    assert plain(PointClass.SINGULAR) == PointClass.SINGULAR.value
    assert plain(np.float64(0.25)) == 0.25
    assert plain(float("inf")) == "inf"
    assert plain(np.bool_(True)) is True
    assert plain({1: (Fraction(1, 3), np.int64(2))}) == {"1": ["1/3", 2]}
    assert tagged(Fraction(3, 4), SAMPLED) == {"value": "3/4", "provenance": "sampled"}


def test_section_text_marks_sampled_and_probe_values():
    section = Section("demo", "Demo", {"a": tagged(1, EXACT), "b": tagged(2, SAMPLED),
                                       "c": tagged(2.5, PROBE)},
                      tables={"rows": [{"x": 1, "y": "1/2"}]})
    text = section.to_text()
    assert "  a: 1\n" in text
    assert "  b: 2  [sampled]" in text
    assert "  c: 2.5  [probe]" in text
    assert "rows:" in text


def test_exit_code_follows_inconclusive_sections():
    report = Report("verdict", {"name": "demo"}, {})
    report.add(Section("a", "A"))
    assert report.exit_code == 0
    assert report.to_dict()["status"] == "ok"
    report.add(Section("b", "B", inconclusive=True))
    assert report.exit_code == 2
    assert report.to_dict()["status"] == "inconclusive"
    assert "inconclusive" in report.to_text()


def test_verdict_report_is_deterministic(martinet, tmp_path):
    def build():
        assessment = assess_point(martinet.frame, martinet.volume, [0, 0, 0], martinet.submanifold("N"))
        report = Report("verdict", {"name": martinet.name}, {"samples": 8})
        report.extend(assessment_sections("origin", assessment))
        return report

    first, second = build(), build()
    assert first.to_json() == second.to_json()
    document = json.loads(first.to_json())
    assert document["tool"]["name"] == "srvolume"
    kinds = [s["kind"] for s in document["sections"]]
    assert kinds[:4] == ["growth", "stratum", "order", "verdict"]
    verdict = document["sections"][3]["fields"]
    assert verdict["finiteness"]["value"] == Finiteness.INFINITE.value
    assert verdict["D_p"] == {"value": 4, "provenance": "exact"}
    path = tmp_path / "report.json"
    first.write(str(path))
    assert json.loads(path.read_text(encoding="utf-8")) == document
