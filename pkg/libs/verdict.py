#   @file verdict.py
#   @brief Hausdorff dimension of strata and the finiteness decision for the
#          volume of small balls at singular points.
#   @date 19-Oct-2026

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from libs.brackets import Frame
from libs.errors import EnumerationOverflow, PreconditionError
from libs.exactalg import Number, as_rat
from libs.flags import (DEFAULT_STEP_CAP, EquiregularityReport, GrowthProfile, PointClass,
                        RestrictedProfile, SubmanifoldSpec, SurrogateReport, generic_growth,
                        growth_vector, restricted_profile, sample_grid, singular_locus_check,
                        strong_equireg_check)
from libs.orders import AboveCap, OrderResult, VolumeForm, order_key, sigma_bounds

logger = logging.getLogger(__name__)


class Finiteness(Enum):
    FINITE = "Finite"
    INFINITE = "Infinite"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class StratumDimension:
    name: str
    q_bar: int


@dataclass
class Verdict:
    """
    D_p and the finiteness of H^{D_p}(B(p, rho)) for small rho, with the rule
    that decided it.

    Example:
        v = finiteness(4, 5, 4, 1, order)
        v.finiteness            # Finiteness.INFINITE
        v.certificate           # 'corank-shortcut: 0 <= 4 - 4 < 1'
    """
    D_p: int
    finiteness: Finiteness
    certificate: str
    inputs: Dict[str, object] = field(default_factory=dict)
    dim_H_strata: Dict[str, int] = field(default_factory=dict)
    sampled: bool = False

    @property
    def label(self) -> str:
        if self.sampled and self.finiteness is not Finiteness.INCONCLUSIVE:
            return f"{self.finiteness.value} (sampled A2)"
        return self.finiteness.value

    @property
    def conclusive(self) -> bool:
        return self.finiteness is not Finiteness.INCONCLUSIVE


def hausdorff_dimension(strata: Sequence[StratumDimension]) -> int:
    """dim_H M = max over strata of their Q-bar."""
    if not strata:
        raise PreconditionError("hausdorff_dimension needs at least one stratum")
    return max(s.q_bar for s in strata)


def finiteness(q_reg: int, q_p: int, q_n: int, r_not_n: int,
               order: Optional[OrderResult]) -> Verdict:
    """
    Decide finiteness at a singular point p of a strongly equiregular stratum N.
    The bound is Q(p) - Q_N - r_notN; sigma <= bound means finite.
    """
    inputs: Dict[str, object] = {"Q_reg": q_reg, "Q_p": q_p, "Q_N": q_n, "r_notN": r_not_n}
    if order is not None:
        inputs.update(sigma_minus=str(order.sigma_minus), sigma_plus=str(order.sigma_plus),
                      sigma=order.sigma)
    if q_reg < q_n:
        return Verdict(q_n, Finiteness.FINITE, f"stratum-dominates: Q_reg = {q_reg} < Q_N = {q_n}",
                       inputs)
    if 0 <= q_reg - q_n < r_not_n:
        return Verdict(q_reg, Finiteness.INFINITE,
                       f"corank-shortcut: 0 <= {q_reg} - {q_n} < {r_not_n}", inputs)
    bound = q_p - q_n - r_not_n
    inputs["bound"] = bound
    if order is None:
        return Verdict(q_reg, Finiteness.INCONCLUSIVE, "no order data", inputs)
    if order.sigma is not None:
        result = Finiteness.FINITE if order.sigma <= bound else Finiteness.INFINITE
        relation = "<=" if result is Finiteness.FINITE else ">"
        return Verdict(q_reg, result, f"sigma-criterion: {order.sigma} {relation} {bound}",
                       inputs, sampled=order.sampled)
    if not isinstance(order.sigma_plus, AboveCap) and order.sigma_plus <= bound:
        return Verdict(q_reg, Finiteness.FINITE,
                       f"sigma-bounds: sigma+ = {order.sigma_plus} <= {bound}", inputs,
                       sampled=order.sampled)
    if order_key(order.sigma_minus) > bound and not isinstance(order.sigma_minus, AboveCap):
        return Verdict(q_reg, Finiteness.INFINITE,
                       f"sigma-bounds: sigma- = {order.sigma_minus} > {bound}", inputs,
                       sampled=order.sampled)
    return Verdict(q_reg, Finiteness.INCONCLUSIVE,
                   f"sigma-bounds: sigma- = {order.sigma_minus} <= {bound} < "
                   f"sigma+ = {order.sigma_plus}", inputs, sampled=order.sampled)


def regular_point_verdict(profile: GrowthProfile) -> Verdict:
    return Verdict(profile.Q, Finiteness.FINITE, f"regular-point: Q = {profile.Q}",
                   {"Q_p": profile.Q, "Q_reg": profile.Q})


def stratum_volume_finiteness(frame: Frame, submanifold: SubmanifoldSpec, point: Sequence[Number],
                              equireg: EquiregularityReport) -> Verdict:
    """H^{Q_N}(B(p, rho) cap N) is finite for p on an equiregular N."""
    if not submanifold.contains(point):
        raise PreconditionError(f"point is not on submanifold {submanifold.name}")
    if not equireg.equiregular:
        raise PreconditionError(f"submanifold {submanifold.name} failed the equiregularity check")
    q_bar = equireg.Q_N_bar
    return Verdict(q_bar, Finiteness.FINITE, f"stratum-volume: H^{q_bar} of the ball within "
                   f"{submanifold.name} is finite", {"Q_N_bar": q_bar})


# ---------- Orchestration ----------

@dataclass
class PointAssessment:
    """Every exact quantity computed at one point, plus the verdicts."""
    point: Tuple[Fraction, ...]
    profile: GrowthProfile
    generic: GrowthProfile
    classification: PointClass
    verdict: Verdict
    submanifold: Optional[str] = None
    restricted: Optional[RestrictedProfile] = None
    equireg: Optional[EquiregularityReport] = None
    order: Optional[OrderResult] = None
    stratum: Optional[Verdict] = None
    surrogate: Optional[SurrogateReport] = None
    notes: List[str] = field(default_factory=list)


def assess_point(frame: Frame, volume: VolumeForm, point: Sequence[Number],
                 submanifold: Optional[SubmanifoldSpec] = None, step_cap: int = DEFAULT_STEP_CAP,
                 order_cap: Optional[int] = None, bracket_len: Optional[int] = None,
                 samples: int = 8, family_budget: int = 20000) -> PointAssessment:
    """
    Growth data at p, then either the regular-point verdict or, at a singular
    point, the stratum analysis through N and the sigma rule.
    """
    pt = tuple(as_rat(v) for v in point)
    generic = generic_growth(frame, step_cap)
    profile = growth_vector(frame, pt, step_cap)
    regular = profile.dims == generic.dims
    classification = PointClass.REGULAR if regular else PointClass.SINGULAR
    logger.info("point %s: growth %s (generic %s), %s", [str(v) for v in pt], profile.dims,
                generic.dims, classification.value)
    strata = [StratumDimension("regular", generic.Q)]
    if regular:
        verdict = regular_point_verdict(profile)
        if submanifold is not None:
            strata.append(StratumDimension(submanifold.name, _stratum_q_bar(frame, submanifold, samples,
                                                                           step_cap)))
        verdict.dim_H_strata = {s.name: s.q_bar for s in strata}
        return PointAssessment(pt, profile, generic, classification, verdict,
                               submanifold=submanifold.name if submanifold else None)
    if submanifold is None:
        raise PreconditionError(
            "point is singular; declare the singular stratum through it and pass it as the submanifold")
    params = submanifold.params_of(pt)
    if params is None:
        raise PreconditionError(f"point is not on submanifold {submanifold.name}")

    restricted = restricted_profile(frame, submanifold, params, step_cap)
    grid = sample_grid(submanifold.dim, samples) + [params]
    equireg = strong_equireg_check(frame, submanifold, grid, step_cap)
    assessment = PointAssessment(pt, profile, generic, classification,
                                 verdict=Verdict(generic.Q, Finiteness.INCONCLUSIVE, "pending"),
                                 submanifold=submanifold.name, restricted=restricted,
                                 equireg=equireg)
    if not equireg.holds_on_samples:
        assessment.notes.append(f"{submanifold.name} is not strongly equiregular on the samples")
    try:
        assessment.surrogate = singular_locus_check(frame, submanifold, pt, samples=samples, cap=step_cap,
                                                    generic=generic)
    except PreconditionError as exc:
        assessment.notes.append(f"singular-locus surrogate skipped: {exc}")
    if assessment.surrogate is not None and not assessment.surrogate.holds:
        assessment.notes.append("singular points off the submanifold were found near p")

    strata.append(StratumDimension(submanifold.name, equireg.Q_N_bar))
    order = None
    if generic.Q >= restricted.Q_N:
        try:
            order = sigma_bounds(frame, volume, submanifold, generic.Q, order_cap=order_cap,
                                 bracket_len=bracket_len, samples=grid, step_cap=step_cap,
                                 budget=family_budget)
        except EnumerationOverflow as exc:
            assessment.notes.append(f"sigma not computed: {exc}")
    verdict = finiteness(generic.Q, profile.Q, restricted.Q_N, restricted.r_not_n, order)
    verdict.dim_H_strata = {s.name: s.q_bar for s in strata}
    if not equireg.holds_on_samples and verdict.conclusive:
        verdict = Verdict(verdict.D_p, Finiteness.INCONCLUSIVE,
                          f"{verdict.certificate} (stratum not strongly equiregular)",
                          verdict.inputs, verdict.dim_H_strata, verdict.sampled)
    assessment.verdict = verdict
    assessment.order = order
    if equireg.equiregular:
        assessment.stratum = stratum_volume_finiteness(frame, submanifold, pt, equireg)
    logger.info("verdict at %s: D_p = %d, %s [%s]", [str(v) for v in pt], verdict.D_p,
                verdict.label, verdict.certificate)
    return assessment


def _stratum_q_bar(frame: Frame, submanifold: SubmanifoldSpec, samples: int, cap: int) -> int:
    report = strong_equireg_check(frame, submanifold, sample_grid(submanifold.dim, samples), cap)
    return report.Q_N_bar
