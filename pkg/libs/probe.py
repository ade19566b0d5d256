#   @file probe.py
#   @brief Floating-point cross-checks: box-counting exponents of balls sampled by
#          horizontal reachability and a tube-cutoff integral test
#          for 1/nu_q near the singular set.
#   @date 19-Oct-2026
#
#   Nothing computed here feeds back into the exact verdicts; probe results
#   only annotate reports.

from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import curve_fit
from scipy.stats import linregress

from libs.brackets import Frame
from libs.errors import ProbeError
from libs.exactalg import Number, Poly, as_rat
from libs.nilpotent import PrivilegedChart
from libs.orders import VolumeForm, nu_polynomials

logger = logging.getLogger(__name__)

BOUNDED_TOLERANCE = 1e-3


def _half_decades(start: float, stop: float) -> Tuple[float, ...]:
    count = int(round(2 * math.log10(start / stop))) + 1
    return tuple(float(v) for v in np.geomspace(start, stop, count))


@dataclass
class ProbeConfig:
    """
    Knobs for both probes. `step` is the RK4 step length; `cells` the number of
    uniform cells per tangential axis; `nodes` the Gauss-Legendre order per cell.
    A grid scale enters the dimension fit only if it has at least `min_cells`
    occupied cells and at most `saturation * samples` of them.
    """
    rho: float = 1.0
    epsilons: Tuple[float, ...] = (0.4, 0.32, 0.25, 0.2, 0.16, 0.126, 0.1, 0.08, 0.063, 0.05)
    samples: int = 10000
    segments: int = 4
    step: float = 0.01
    deltas: Tuple[float, ...] = field(default_factory=lambda: _half_decades(1e-1, 1e-5))
    cells: int = 4
    subdivisions: int = 2
    nodes: int = 3
    seed: int = 0
    budget: int = 5_000_000
    min_cells: int = 16
    saturation: float = 0.2

    def __post_init__(self):
        self.epsilons = tuple(float(e) for e in self.epsilons)
        self.deltas = tuple(float(d) for d in self.deltas)
        if self.rho <= 0 or self.step <= 0:
            raise ProbeError("rho and step must be positive")
        if min(self.samples, self.segments, self.cells, self.subdivisions, self.nodes, self.budget) < 1:
            raise ProbeError("sample, segment, cell, node counts and budget must be positive")
        if not 0 < self.saturation <= 1 or self.min_cells < 1:
            raise ProbeError("saturation must lie in (0, 1] and min_cells be positive")
        if any(e < 0 for e in self.epsilons) or any(d <= 0 for d in self.deltas):
            raise ProbeError("epsilons must be nonnegative and deltas positive")
        if any(e > self.rho for e in self.epsilons):
            raise ProbeError(f"every epsilon must be <= rho = {self.rho}")
        if any(b >= a for a, b in zip(self.deltas, self.deltas[1:])):
            raise ProbeError("deltas must be strictly decreasing")
        if self.deltas and self.deltas[0] >= self.rho:
            raise ProbeError("tube widths must be smaller than rho")

    @classmethod
    def from_mapping(cls, values: Optional[Mapping[str, object]]) -> "ProbeConfig":
        values = dict(values or {})
        known = {k: v for k, v in values.items() if k in cls.__dataclass_fields__}
        unknown = sorted(set(values) - set(known))
        if unknown:
            logger.warning("ignoring unknown probe settings: %s", ", ".join(unknown))
        for key in ("epsilons", "deltas"):
            if key in known:
                known[key] = tuple(known[key])
        return cls(**known)


@dataclass
class ProbeReport:
    """
    Outcome of one probe. `series` holds the per-scale data: (epsilon, ...)
    for the dimension probe, (delta, integral) for the finiteness probe.
    """
    kind: str
    series: pd.DataFrame
    exponent: Optional[float] = None
    stderr: Optional[float] = None
    classification: Optional[str] = None
    diagnostics: Dict[str, object] = field(default_factory=dict)

    @property
    def consistent_with(self) -> Optional[str]:
        if self.classification is None:
            return None
        return "Finite" if self.classification == "bounded" else "Infinite"


# ---------- Numeric evaluation of exact data ----------

class NumericPoly:
    """Float evaluator of a Poly over batches of points (rows)."""

    def __init__(self, poly: Poly):
        if poly.params:
            raise ProbeError("bind parameters before probing")
        items = list(poly.terms.items())
        self.nvars = poly.nvars
        self.exps = np.array([e for e, _ in items], dtype=np.int64).reshape(len(items), poly.nvars)
        self.coeffs = np.array([float(c) for _, c in items], dtype=float)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        if not len(self.coeffs):
            return np.zeros(points.shape[0])
        monomials = np.prod(points[:, None, :] ** self.exps[None, :, :], axis=2)
        return monomials @ self.coeffs


class NumericFrame:

    def __init__(self, frame: Frame):
        self.dim = frame.dim
        self.rank = frame.rank
        self.fields = [[NumericPoly(c) for c in f.components] for f in frame.fields]

    def field_values(self, i: int, points: np.ndarray) -> np.ndarray:
        return np.stack([c(points) for c in self.fields[i]], axis=1)

    def velocity(self, points: np.ndarray, controls: np.ndarray) -> np.ndarray:
        """sum_i u_i X_i at each row; controls has one row per point."""
        total = np.zeros_like(points)
        for i in range(self.rank):
            total += controls[:, i:i + 1] * self.field_values(i, points)
        return total


def integrate_control(frame: Frame, start: Sequence[Number], controls: np.ndarray,
                      durations: np.ndarray, step: float) -> np.ndarray:
    """
    Endpoints of piecewise-constant controls, one trajectory per row.
    controls: (S, K, m); durations: (S, K). Classical RK4, each segment split
    into the same number of substeps of length <= step.
    """
    nf = frame if isinstance(frame, NumericFrame) else NumericFrame(frame)
    controls = np.asarray(controls, dtype=float)
    durations = np.asarray(durations, dtype=float)
    if controls.ndim != 3 or controls.shape[2] != nf.rank:
        raise ProbeError(f"controls must have shape (samples, segments, {nf.rank})")
    x = np.tile(np.array([float(as_rat(v)) for v in start]), (controls.shape[0], 1))
    for k in range(controls.shape[1]):
        u = controls[:, k, :]
        substeps = max(1, int(math.ceil(durations[:, k].max() / step)))
        h = (durations[:, k] / substeps)[:, None]
        for _ in range(substeps):
            k1 = nf.velocity(x, u)
            k2 = nf.velocity(x + 0.5 * h * k1, u)
            k3 = nf.velocity(x + 0.5 * h * k2, u)
            k4 = nf.velocity(x + h * k3, u)
            x = x + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(x)):
            raise ProbeError(f"integrator step failure in segment {k + 1}")
    return x


def reach_cloud(frame: Frame, point: Sequence[Number], epsilon: float, config: ProbeConfig,
                rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """
    Endpoints of unit-speed horizontal curves of length epsilon from point:
    random switching times summing to epsilon, random directions on the unit
    sphere of R^m.
    """
    pt = np.array([float(as_rat(v)) for v in point])
    if epsilon == 0:
        return pt[None, :]
    if epsilon < 0 or epsilon > config.rho:
        raise ProbeError(f"epsilon must lie in [0, rho], got {epsilon}")
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    durations = rng.dirichlet(np.ones(config.segments), size=config.samples) * epsilon
    directions = rng.standard_normal((config.samples, config.segments, frame.rank))
    directions /= np.linalg.norm(directions, axis=2, keepdims=True)
    return integrate_control(frame, point, directions, durations, config.step)


# ---------- Dimension probe ----------

def occupied_cells(points: np.ndarray, sides: np.ndarray) -> int:
    """Number of cells of the grid with the given side lengths that hold a point."""
    return int(np.unique(np.floor(points / sides), axis=0).shape[0])


def dimension_probe(frame: Frame, point: Sequence[Number], config: ProbeConfig,
                    chart: Optional[PrivilegedChart] = None) -> ProbeReport:
    """
    Box-counting exponent of the ball around `point`.

    The reachable cloud at the largest epsilon is rescaled so its bounding box
    is the unit cube and covered by a grid with sides (epsilon / epsilon_max)^w_j.
    The exponent is the slope of log N(epsilon) against log(1/epsilon), N being the
    number of occupied cells, over the scales that are neither too coarse nor
    saturated by the sample count. With a chart the w_j are the weights of the
    privileged coordinates (slope ~ Q(p)); without one the raw offsets are used
    with unit weights (slope ~ topological dimension).

    Each scale also records the 5%-95% quantile spreads of its own cloud; their
    log-volume slope is reported as a diagnostic only.
    """
    epsilons = sorted((e for e in config.epsilons if e > 0), reverse=True)
    if len(epsilons) < 3:
        raise ProbeError("degenerate fit: need at least 3 positive epsilon values")
    n = frame.dim
    center = np.array([float(as_rat(v)) for v in point])
    if chart is not None:
        coords = [NumericPoly(c) for c in chart.coords]
        weights = np.array(chart.weights, dtype=float)

        def to_chart(cloud):
            return np.stack([c(cloud) for c in coords], axis=1)
    else:
        weights = np.ones(n)

        def to_chart(cloud):
            return cloud - center
    nf = NumericFrame(frame)
    clouds = {}
    for eps in epsilons:
        # common random numbers across scales
        clouds[eps] = to_chart(reach_cloud(nf, point, eps, config, np.random.default_rng(config.seed)))
    reference = clouds[epsilons[0]]
    lower = reference.min(axis=0)
    span = reference.max(axis=0) - lower
    if np.any(span <= 0):
        raise ProbeError(f"reachable cloud is flat in some coordinate at epsilon = {epsilons[0]}")
    # grid anchored at the lower corner of the bounding box, last cell closed
    unit = np.minimum((reference - lower) / span, 1 - 1e-12)
    limit = config.saturation * config.samples
    rows = []
    for eps in epsilons:
        count = occupied_cells(unit, (eps / epsilons[0]) ** weights)
        z = clouds[eps]
        lo, hi = np.quantile(z, [0.05, 0.95], axis=0)
        spreads = hi - lo
        if np.any(spreads <= 0):
            raise ProbeError(f"reachable cloud is flat in some coordinate at epsilon = {eps}")
        ballbox = np.max(np.abs(z), axis=0) / eps ** weights
        rows.append({"epsilon": eps, "log_inv_epsilon": -math.log(eps), "cells": count,
                     "log_cells": math.log(count), "fitted": config.min_cells <= count <= limit,
                     "log_spread_volume": float(np.sum(np.log(spreads))),
                     "ballbox_max": float(ballbox.max()), "ballbox_min": float(ballbox.min())})
        logger.debug("epsilon %.4g: %d occupied cells, spreads %s", eps, count, spreads)
    series = pd.DataFrame(rows)
    used = series[series["fitted"]]
    if len(used) < 3:
        raise ProbeError(f"degenerate fit: only {len(used)} grid scales have between {config.min_cells} "
                         f"and {int(limit)} occupied cells; raise samples or adjust epsilons")
    fit = linregress(used["log_inv_epsilon"], used["log_cells"])
    spread_fit = linregress(-series["log_inv_epsilon"], series["log_spread_volume"])
    stability = float(series["ballbox_max"].max() / series["ballbox_max"].min())
    logger.info("dimension probe: exponent %.3f +/- %.3f (%d of %d scales, %d samples), spread slope %.3f",
                fit.slope, fit.stderr, len(used), len(epsilons), config.samples, spread_fit.slope)
    return ProbeReport("dimension", series, exponent=float(fit.slope), stderr=float(fit.stderr),
                       diagnostics={"weights": [int(w) for w in weights], "ballbox_ratio": stability,
                                    "r_value": float(fit.rvalue), "chart": chart is not None,
                                    "fitted_scales": int(len(used)),
                                    "spread_exponent": float(spread_fit.slope)})


# ---------- Finiteness probe ----------

def _transverse_breaks(deltas: Sequence[float], rho: float, subdivisions: int) -> np.ndarray:
    """Positive cell breakpoints from the smallest delta up to rho, containing every delta."""
    anchors = sorted(set(deltas) | {rho})
    breaks = [anchors[0]]
    for a, b in zip(anchors, anchors[1:]):
        breaks.extend(np.geomspace(a, b, subdivisions + 1)[1:])
    return np.array(breaks)


def _axis_nodes(lower: np.ndarray, upper: np.ndarray, nodes: int
                ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights over a list of cells, plus each node's cell lower |x|."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    half = (upper - lower) / 2.0
    mid = (upper + lower) / 2.0
    pos = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wts = (half[:, None] * w[None, :]).ravel()
    low = np.repeat(np.minimum(np.abs(lower), np.abs(upper)), nodes)
    return pos, wts, low


def _classify(deltas: np.ndarray, integrals: np.ndarray) -> Tuple[str, Dict[str, object]]:
    diagnostics: Dict[str, object] = {}
    last, prev = integrals[-1], integrals[-2]
    diagnostics["last_increment"] = float(abs(last - prev))
    if abs(last - prev) < BOUNDED_TOLERANCE * abs(last):
        return "bounded", diagnostics
    logs = np.log(1.0 / deltas)
    log_coeffs = np.polyfit(logs, integrals, 1)
    log_sse = float(np.sum((np.polyval(log_coeffs, logs) - integrals) ** 2))
    diagnostics["log_fit"] = {"a": float(log_coeffs[1]), "b": float(log_coeffs[0]), "sse": log_sse}

    def power_law(L, a, b, c):
        return a + b * np.exp(c * L)

    try:
        popt, _ = curve_fit(power_law, logs, integrals, p0=(integrals[0], 1.0, 1.0),
                            bounds=([-np.inf, -np.inf, 0.05], [np.inf, np.inf, 10.0]), maxfev=20000)
        power_sse = float(np.sum((power_law(logs, *popt) - integrals) ** 2))
        diagnostics["power_fit"] = {"a": float(popt[0]), "b": float(popt[1]), "c": float(popt[2]),
                                    "sse": power_sse}
    except RuntimeError as exc:
        logger.warning("power-law fit did not converge: %s", exc)
        power_sse = float("inf")
    return ("log-growth" if log_sse <= power_sse else "power-growth"), diagnostics


def finiteness_probe(frame: Frame, volume: VolumeForm, point: Sequence[Number],
                     singular_axes: Sequence[int], q_ref: int, config: ProbeConfig,
                     nu_family: Optional[List[Poly]] = None) -> ProbeReport:
    """
    I(delta) = integral of 1/nu_q over the box p + [-rho, rho]^n minus the tube
    max_{j in singular_axes} |x_j| < delta around Sigma = {x_j = 0, j in
    singular_axes}. Transverse axes use geometric cells whose breakpoints
    contain every delta; tangential axes use uniform cells.
    """
    n = frame.dim
    if not singular_axes:
        raise ProbeError("the singular set must zero at least one coordinate")
    pt = np.array([float(as_rat(v)) for v in point])
    if any(pt[j] != 0 for j in singular_axes):
        raise ProbeError("the center must lie on the singular set")
    if len(config.deltas) < 3:
        raise ProbeError("need at least 3 tube widths")
    if nu_family is None:
        nu_family = [poly for _, poly in nu_polynomials(frame, volume, q_ref)]
    if not nu_family:
        raise ProbeError(f"no family of total length {q_ref} has nonzero volume")
    nus = [NumericPoly(p) for p in nu_family]

    transverse = set(singular_axes)
    breaks = _transverse_breaks(config.deltas, config.rho, config.subdivisions)
    axes = []
    for j in range(n):
        if j in transverse:
            lower = np.concatenate([-breaks[1:][::-1], breaks[:-1]])
            upper = np.concatenate([-breaks[:-1][::-1], breaks[1:]])
        else:
            edges = np.linspace(pt[j] - config.rho, pt[j] + config.rho, config.cells + 1)
            lower, upper = edges[:-1], edges[1:]
        pos, wts, low = _axis_nodes(lower, upper, config.nodes)
        if j not in transverse:
            low = np.full_like(low, -np.inf)
        axes.append((pos, wts, low))
    total_nodes = int(np.prod([len(a[0]) for a in axes]))
    if total_nodes > config.budget:
        raise ProbeError(f"integration budget exceeded: {total_nodes} nodes > {config.budget}")
    logger.info("finiteness probe: %d quadrature nodes, %d tube widths", total_nodes, len(config.deltas))

    deltas = np.array(config.deltas)
    integrals = np.zeros(len(deltas))
    rest = axes[1:]
    rest_grid = np.meshgrid(*[a[0] for a in rest], indexing="ij")
    rest_w = np.prod(np.meshgrid(*[a[1] for a in rest], indexing="ij"), axis=0).ravel()
    rest_low = np.max(np.meshgrid(*[a[2] for a in rest], indexing="ij"), axis=0).ravel() \
        if rest else np.zeros(1)
    rest_pts = np.stack([g.ravel() for g in rest_grid], axis=1) if rest else np.zeros((1, 0))
    first_pos, first_w, first_low = axes[0]
    for x0, w0, l0 in zip(first_pos, first_w, first_low):
        points = np.concatenate([np.full((rest_pts.shape[0], 1), x0), rest_pts], axis=1)
        dist = np.maximum(rest_low, l0)
        keep = dist >= deltas[-1]
        if not np.any(keep):
            continue
        nu = np.max(np.abs(np.stack([f(points[keep]) for f in nus], axis=0)), axis=0)
        with np.errstate(divide="ignore"):
            values = w0 * rest_w[keep] / nu
        if not np.all(np.isfinite(values)):
            raise ProbeError("nu vanishes off the singular set inside the box")
        for k, delta in enumerate(deltas):
            integrals[k] += values[dist[keep] >= delta].sum()

    classification, diagnostics = _classify(deltas, integrals)
    series = pd.DataFrame({"delta": deltas, "integral": integrals})
    logger.info("finiteness probe: I(delta_K) = %.6g, classified %s", integrals[-1], classification)
    diagnostics.update(nodes=total_nodes, singular_axes=[int(j) + 1 for j in singular_axes])
    return ProbeReport("finiteness", series, classification=classification, diagnostics=diagnostics)


def write_series_csv(report: ProbeReport, directory: str, stem: str) -> str:
    """Dump a probe series as CSV; returns the written path."""
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, f"{stem}_{report.kind}.csv")
    report.series.to_csv(path, index=False)
    return path
