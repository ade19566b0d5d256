"""HTML rendering of machine reports."""

import pandas as pd

import generate_static_report
from libs.probe import ProbeReport
from libs.report import Report, Section, probe_section, tagged


def write_report(path):
    report = Report("probe", {"name": "martinet", "dimension": 3, "rank": 2,
                              "frame": {"X1": ["1", "0", "0"], "X2": ["0", "1", "x1^2/2"]}}, {})
    series = pd.DataFrame({"epsilon": [0.4, 0.2, 0.1, 0.05], "log_inv_epsilon": [0.92, 1.61, 2.3, 3.0],
                           "cells": [8, 60, 900, 2400], "log_cells": [2.08, 4.09, 6.8, 7.78],
                           "fitted": [False, True, True, False]})
    report.add(probe_section("origin", ProbeReport("dimension", series, exponent=3.98, stderr=0.02), 4))
    report.add(Section("verdict", "Verdict at origin", {"finiteness": tagged("Infinite", "exact")},
                       inconclusive=True))
    report.write(str(path))


def test_html_report_from_machine_report(tmp_path):
    source = tmp_path / "report.json"
    target = tmp_path / "report.html"
    write_report(source)
    assert generate_static_report.main([str(source), "--output", str(target), "--no-browser"]) == 0
    page = target.read_text(encoding="utf-8")
    assert "probe on martinet" in page
    assert "Ball-volume scaling probe at origin" in page
    assert "plotly-graph-div" in page
    assert "data:text/csv;base64," in page
    assert 'class="plot-section inconclusive"' in page
    assert "x1^2/2" in page


def test_rejects_files_that_are_not_reports(tmp_path):
    bogus = tmp_path / "bogus.json"
    bogus.write_text('{"hello": 1}', encoding="utf-8")
    assert generate_static_report.main([str(bogus), "--no-browser"]) == 1
    assert generate_static_report.main([str(tmp_path / "missing.json"), "--no-browser"]) == 1
