#   @file report.py
#   @brief Report assembly: ordered sections of exact, sampled and probe
#          results rendered as a text table view or a deterministic JSON document.
#   @date 19-Oct-2026

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field, is_dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from libs.flags import (EquiregularityReport, GrowthProfile, PointClass, RestrictedProfile,
                        SurrogateReport)
from libs.nilpotent import HatForm, NilpotentFrame, PrivilegedChart
from libs.orders import AboveCap, NuValue, OrderResult
from libs.probe import ProbeReport
from libs.verdict import PointAssessment, Verdict

logger = logging.getLogger(__name__)

TOOL_NAME = "srvolume"
TOOL_VERSION = "0.1.0"

EXACT = "exact"
SAMPLED = "sampled"
PROBE = "probe"

BANNER = "=" * 40


def plain(value: Any) -> Any:
    """JSON-safe rendering; rationals become 'p/q' strings."""
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, Fraction):
        return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    if isinstance(value, AboveCap):
        return str(value)
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [plain(v) for v in value]
    if is_dataclass(value):
        return plain(asdict(value))
    return str(value)


def tagged(value: Any, provenance: str) -> Dict[str, Any]:
    return {"value": plain(value), "provenance": provenance}


def _point_text(point: Sequence[Fraction]) -> str:
    return "(" + ", ".join(plain(v) for v in point) + ")"


@dataclass
class Section:
    kind: str
    title: str
    fields: Dict[str, Any] = field(default_factory=dict)
    tables: Dict[str, List[Dict[str, Any]]] = field(default_factory=dict)
    inconclusive: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "title": self.title, "fields": self.fields,
                "tables": {name: plain(rows) for name, rows in self.tables.items()},
                "inconclusive": self.inconclusive}

    def to_text(self) -> str:
        lines = [self.title, BANNER]
        for key, item in self.fields.items():
            value = item["value"] if isinstance(item, dict) and "provenance" in item else item
            suffix = f"  [{item['provenance']}]" if isinstance(item, dict) and \
                item.get("provenance") in (SAMPLED, PROBE) else ""
            if isinstance(value, list):
                value = ", ".join(str(v) for v in value) if value else "-"
            elif isinstance(value, dict):
                value = ", ".join(f"{k}={v}" for k, v in value.items()) if value else "-"
            lines.append(f"  {key}: {value}{suffix}")
        for name, rows in self.tables.items():
            if not rows:
                continue
            lines.append("")
            lines.append(f"  {name}:")
            table = pd.DataFrame(plain(rows)).to_string(index=False)
            lines.extend("    " + row for row in table.splitlines())
        return "\n".join(lines)


class Report:
    """
    One run of the tool: an ordered list of sections plus the manifest and
    option echo. Serialization is deterministic for fixed inputs.
    """

    def __init__(self, command: str, manifest_echo: Dict[str, Any], options_echo: Dict[str, Any]):
        self.command = command
        self.manifest_echo = manifest_echo
        self.options_echo = options_echo
        self.sections: List[Section] = []

    def add(self, section: Section) -> Section:
        self.sections.append(section)
        return section

    def extend(self, sections: Sequence[Section]) -> None:
        self.sections.extend(sections)

    @property
    def inconclusive(self) -> bool:
        return any(s.inconclusive for s in self.sections)

    @property
    def exit_code(self) -> int:
        return 2 if self.inconclusive else 0

    def to_dict(self) -> Dict[str, Any]:
        return {"tool": {"name": TOOL_NAME, "version": TOOL_VERSION},
                "command": self.command,
                "manifest": plain(self.manifest_echo),
                "options": plain(self.options_echo),
                "sections": [s.to_dict() for s in self.sections],
                "status": "inconclusive" if self.inconclusive else "ok"}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def to_text(self) -> str:
        header = f"{TOOL_NAME} {TOOL_VERSION} - {self.command} on {self.manifest_echo.get('name', '?')}"
        blocks = [header, BANNER]
        blocks.extend("\n" + s.to_text() for s in self.sections)
        if self.inconclusive:
            blocks.append("\nSome results are inconclusive (see sections above).")
        return "\n".join(blocks)

    def write(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.to_json())
            f.write("\n")
        logger.info("machine report written to %s", path)


# ---------- Section builders ----------

def growth_section(label: str, profile: GrowthProfile, generic: GrowthProfile,
                   classification: PointClass) -> Section:
    section = Section("growth", f"Growth vector at {label}")
    section.fields = {
        "point": tagged(profile.point, EXACT),
        "growth_vector": tagged(profile.dims, EXACT),
        "step": tagged(profile.step, EXACT),
        "Q": tagged(profile.Q, EXACT),
        "generic_growth_vector": tagged(generic.dims, EXACT),
        "Q_reg": tagged(generic.Q, EXACT),
        "classification": tagged(classification, EXACT),
    }
    section.tables["layers"] = [{"layer": i, "n_i": d, "increment": k}
                                for i, (d, k) in enumerate(zip(profile.dims, profile.increments), 1)]
    return section


def restricted_section(name: str, restricted: RestrictedProfile,
                       equireg: Optional[EquiregularityReport] = None,
                       surrogate: Optional[SurrogateReport] = None) -> Section:
    section = Section("stratum", f"Submanifold {name} at {_point_text(restricted.point)}")
    section.fields = {
        "b": tagged(restricted.b, EXACT),
        "growth_vector": tagged(restricted.dims, EXACT),
        "restricted_growth_vector": tagged(restricted.dims_n, EXACT),
        "Q": tagged(restricted.Q, EXACT),
        "Q_N": tagged(restricted.Q_N, EXACT),
        "r_notN": tagged(restricted.r_not_n, EXACT),
    }
    if equireg is not None:
        section.fields.update({
            "strongly_equiregular": tagged(equireg.holds_on_samples,
                                           EXACT if equireg.generic_confirmed else SAMPLED),
            "equiregular": tagged(equireg.equiregular, SAMPLED),
            "generic_restricted_growth_vector": tagged(equireg.generic_dims_n, EXACT),
            "Q_N_bar": tagged(equireg.Q_N_bar, SAMPLED),
            "samples_checked": tagged(len(equireg.profiles), SAMPLED),
        })
        section.tables["equiregularity witnesses"] = list(equireg.witnesses)
        section.inconclusive = not equireg.holds_on_samples
    if surrogate is not None:
        section.fields.update({
            "singular_set_inside_N": tagged(surrogate.holds, SAMPLED),
            "singular_points_off_N": tagged([_point_text(q) for q in surrogate.singular_off_n], SAMPLED),
            "regular_points_on_N": tagged([_point_text(q) for q in surrogate.regular_on_n], SAMPLED),
        })
    return section


def order_section(name: str, order: OrderResult) -> Section:
    section = Section("order", f"Nonholonomic order of the volume along {name}")
    provenance = SAMPLED if order.sampled else EXACT
    section.fields = {
        "sigma_minus": tagged(order.sigma_minus, EXACT),
        "sigma_plus": tagged(order.sigma_plus, provenance),
        "sigma": tagged(order.sigma if order.sigma is not None else "undefined", provenance),
        "witnesses": tagged([f.label() for f in order.witnesses], EXACT),
        "q_ref": tagged(order.q_ref, EXACT),
        "bracket_len": tagged(order.bracket_len, EXACT),
        "order_cap": tagged(order.order_cap, EXACT),
        "samples": tagged(len(order.samples), SAMPLED),
    }
    section.tables["families"] = [
        {"family": f.family.label(), "generic_order": plain(f.generic_order),
         "min_sampled_order": plain(min(f.sampled_orders, key=_order_sort, default="-"))}
        for f in order.families]
    section.inconclusive = isinstance(order.sigma_minus, AboveCap) or isinstance(order.sigma_plus, AboveCap)
    return section


def _order_sort(value: Any) -> float:
    return math.inf if isinstance(value, AboveCap) else float(value)


def verdict_section(label: str, verdict: Verdict, title: Optional[str] = None) -> Section:
    section = Section("verdict", title or f"Verdict at {label}")
    provenance = SAMPLED if verdict.sampled else EXACT
    section.fields = {
        "D_p": tagged(verdict.D_p, EXACT),
        "finiteness": tagged(verdict.label, provenance),
        "certificate": tagged(verdict.certificate, provenance),
        "inputs": tagged(verdict.inputs, EXACT),
    }
    if verdict.dim_H_strata:
        section.fields["dim_H_strata"] = tagged(verdict.dim_H_strata, SAMPLED)
        section.fields["dim_H"] = tagged(max(verdict.dim_H_strata.values()), SAMPLED)
    section.inconclusive = not verdict.conclusive
    return section


def notes_section(label: str, notes: Sequence[str]) -> Section:
    return Section("notes", f"Notes at {label}", {"notes": list(notes)})


def assessment_sections(label: str, assessment: PointAssessment) -> List[Section]:
    sections = [growth_section(label, assessment.profile, assessment.generic, assessment.classification)]
    if assessment.restricted is not None:
        sections.append(restricted_section(assessment.submanifold, assessment.restricted,
                                           assessment.equireg, assessment.surrogate))
    if assessment.order is not None:
        sections.append(order_section(assessment.submanifold, assessment.order))
    sections.append(verdict_section(label, assessment.verdict))
    if assessment.stratum is not None:
        sections.append(verdict_section(label, assessment.stratum,
                                        f"Volume of the ball within {assessment.submanifold}"))
    if assessment.notes:
        sections.append(notes_section(label, assessment.notes))
    return sections


def chart_section(label: str, chart: PrivilegedChart, nil_frame: NilpotentFrame,
                  coordinates: Sequence[str], hat: Optional[HatForm] = None) -> Section:
    znames = chart.coordinate_names()
    section = Section("nilpotent", f"Privileged chart and nilpotent approximation at {label}")
    section.fields = {
        "center": tagged(chart.center, EXACT),
        "weights": tagged(chart.weights, EXACT),
        "Q": tagged(chart.Q, EXACT),
        "tangential_fields": tagged(chart.tangential if chart.submanifold else 0, EXACT),
        "truncation_order": tagged(chart.trunc, EXACT),
        "homogeneous": tagged(nil_frame.is_homogeneous(), EXACT),
    }
    if chart.submanifold:
        section.fields["submanifold"] = chart.submanifold
    section.tables["coordinates"] = [
        {"z": znames[j], "weight": chart.weights[j], "field": f.label(),
         "z(x)": chart.coords[j].format(list(coordinates)),
         "x(z)": chart.param_map[j].format(znames)}
        for j, f in enumerate(chart.fields)]
    section.tables["nilpotent frame"] = [
        {"field": f"X{i}^", "expression": f.format(znames)}
        for i, f in enumerate(nil_frame.fields, 1)]
    if hat is not None:
        section.fields["hat_volume_scalar"] = tagged(hat.scalar, EXACT)
        section.tables["hat fields"] = [{"field": lab, "expression": f.format(znames)}
                                        for lab, f in zip(hat.labels, hat.fields)]
    return section


def nu_section(label: str, nu: NuValue) -> Section:
    return Section("nu", f"nu at {label}", {
        "point": tagged(nu.point, EXACT),
        "nu": tagged(nu.value, EXACT),
        "argmax": tagged([f.label() for f in nu.argmax], EXACT)})


def probe_section(label: str, report: ProbeReport, expected: Optional[Any] = None) -> Section:
    titles = {"dimension": "Ball-volume scaling probe", "finiteness": "Tube-cutoff integral probe"}
    section = Section(f"probe-{report.kind}", f"{titles.get(report.kind, report.kind)} at {label}")
    if report.exponent is not None:
        section.fields["exponent"] = tagged(report.exponent, PROBE)
        section.fields["stderr"] = tagged(report.stderr, PROBE)
    if report.classification is not None:
        section.fields["classification"] = tagged(report.classification, PROBE)
        section.fields["consistent_with"] = tagged(report.consistent_with, PROBE)
    if expected is not None:
        section.fields["exact_reference"] = tagged(expected, EXACT)
    section.fields["diagnostics"] = tagged(report.diagnostics, PROBE)
    section.tables["series"] = report.series.to_dict(orient="records")
    return section
