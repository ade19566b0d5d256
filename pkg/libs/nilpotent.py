#   @file nilpotent.py
#   @brief Privileged coordinates from exponential maps of an adapted frame,
#          nilpotent approximation of the frame and the induced form data on a
#          strongly equiregular submanifold.
#   @date 19-Oct-2026

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from libs.brackets import Frame, MultiIndex, VecField, bracket_of, format_index, iter_bracket_levels
from libs.errors import (DependentFamilyError, PreconditionError, PrivilegeError, TruncationError)
from libs.exactalg import (Number, Poly, VectorBasis, as_rat, nullspace, rat_str, rational_det,
                           rational_inverse, rational_rank, solve)
from libs.flags import DEFAULT_STEP_CAP, SubmanifoldSpec, adapted_family, growth_vector
from libs.orders import OrderValue, VolumeForm, nonholonomic_order

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AdaptedField:
    """Y = sum_I c_I X_I (constant coefficients) lying in the flag layer `layer` at the center."""
    combination: Tuple[Tuple[MultiIndex, Fraction], ...]
    layer: int
    field: VecField
    tangential: bool = False

    @classmethod
    def single(cls, index: MultiIndex, frame: Frame, tangential: bool = False) -> "AdaptedField":
        return cls(((tuple(index), Fraction(1)),), len(index), bracket_of(index, frame), tangential)

    def label(self) -> str:
        parts = []
        for index, coeff in self.combination:
            name = format_index(index)
            parts.append(name if coeff == 1 else f"{rat_str(coeff)}*{name}")
        return " + ".join(parts)


@dataclass(frozen=True)
class PrivilegedChart:
    """
    Coordinates z centred at p built as
        Phi(z) = exp(sum_{j>b} z_j Y_j) o exp(sum_{j<=b} z_j Y_j)(p)
    where Y_1..Y_b are tangent to N (b = n when no submanifold is given, and
    the second factor is then empty).

    coords[j] expresses z_j as a polynomial in the ambient coordinates y;
    param_map[k] expresses y_k as a polynomial in z. Both are truncated at
    total degree `trunc`.
    """
    center: Tuple[Fraction, ...]
    fields: Tuple[AdaptedField, ...]
    weights: Tuple[int, ...]
    coords: Tuple[Poly, ...]
    param_map: Tuple[Poly, ...]
    trunc: int
    tangential: int
    submanifold: Optional[str] = None

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def Q(self) -> int:
        return sum(self.weights)

    def coordinate_names(self) -> List[str]:
        return [f"z{j + 1}" for j in range(self.dim)]


@dataclass(frozen=True)
class NilpotentFrame:
    """Weighted-degree -1 parts of the frame in privileged coordinates."""
    frame: Frame
    weights: Tuple[int, ...]
    center: Tuple[Fraction, ...]

    @property
    def fields(self) -> Tuple[VecField, ...]:
        return self.frame.fields

    def is_homogeneous(self) -> bool:
        return all(weighted_field_degrees(f, self.weights) <= {-1} for f in self.fields)


def weighted_field_degrees(field: VecField, weights: Sequence[int]) -> set:
    """Weighted degrees of the monomials of a field; d/dz_j carries weight -w_j."""
    degrees = set()
    for j, comp in enumerate(field.components):
        for degree in comp.weighted_terms(weights):
            degrees.add(degree - weights[j])
    return degrees


# ---------- Adapted frames ----------

def _submanifold_adapted_fields(frame: Frame, point: Tuple[Fraction, ...],
                                tangent: List[List[Fraction]], cap: int) -> List[AdaptedField]:
    """
    Basis adapted to both flags at q: at each layer i, first the new
    directions of D^i cap T_qN (as constant combinations of brackets of length
    <= i), then brackets of length i completing D^i.
    """
    n = frame.dim
    b = len(tangent)
    chosen = VectorBasis(n)
    tangential: List[AdaptedField] = []
    transversal: List[AdaptedField] = []
    entries: List[Tuple[MultiIndex, VecField, List[Fraction]]] = []
    for layer, level in enumerate(iter_bracket_levels(frame), 1):
        if layer > cap or chosen.rank == n:
            break
        for entry in level:
            entries.append((entry.index, entry.field, entry.field.evaluate(point)))
        # solutions of sum_k a_k X_Ik(q) = sum_l c_l t_l
        columns = [value for _, _, value in entries] + [[-v for v in t] for t in tangent]
        rows = [[col[r] for col in columns] for r in range(n)]
        for vec in nullspace(rows, len(columns)):
            coeffs = vec[:len(entries)]
            value = [sum(c * e[2][r] for c, e in zip(coeffs, entries)) for r in range(n)]
            if all(v == 0 for v in value) or not chosen.add(value):
                continue
            combination = tuple((entries[k][0], c) for k, c in enumerate(coeffs) if c != 0)
            field_sum = VecField.zero(n)
            for k, c in enumerate(coeffs):
                if c != 0:
                    field_sum = field_sum + entries[k][1].scale(c)
            tangential.append(AdaptedField(combination, layer, field_sum, True))
        for entry in level:
            if chosen.rank == n:
                break
            if chosen.add(entry.field.evaluate(point)):
                transversal.append(AdaptedField.single(entry.index, frame))
    if chosen.rank < n or len(tangential) != b:
        raise PreconditionError(
            f"no basis adapted to the restricted flag within {cap} steps "
            f"({len(tangential)} tangential of {b}, rank {chosen.rank} of {n})")
    return tangential + transversal


# ---------- Series algebra ----------

def flow_series(fields: Sequence[VecField], axes: Sequence[int], start: Sequence[Poly],
                trunc: int) -> List[Poly]:
    """
    Taylor series of exp(sum_k z_axes[k] Y_k)(start) in the chart variables,
    graded by degree in the flowed variables: d * h_d = [sum_k z_k Y_k(u)]_d
    with u = h_0 + ... + h_(d-1) and h_0 = start.
    """
    if not fields:
        return list(start)
    nvars = start[0].nvars
    zvars = [Poly.variable(nvars, j) for j in range(nvars)]
    u = list(start)
    for d in range(1, trunc + 1):
        total = [Poly.zero(nvars) for _ in u]
        for field, axis in zip(fields, axes):
            for k, comp in enumerate(field.components):
                if comp.is_zero():
                    continue
                value = comp.substitute(u, trunc)
                total[k] = total[k] + zvars[axis].mul(value, trunc)
        step = [t.homogeneous_part(d, axes) * Fraction(1, d) for t in total]
        if all(s.is_zero() for s in step):
            continue
        u = [a + s for a, s in zip(u, step)]
    return [c.truncate(trunc) for c in u]


def invert_series(param_map: Sequence[Poly], center: Sequence[Fraction], trunc: int) -> List[Poly]:
    """
    Inverse of y = Phi(z) with Phi(0) = center, truncated at total degree trunc,
    by the fixed point z = A^-1 (u - H(z)), u = y - center.
    """
    n = len(param_map)
    linear = [[c.terms.get(tuple(int(i == j) for i in range(n)), Fraction(0)) for j in range(n)]
              for c in param_map]
    try:
        a_inv = rational_inverse(linear)
    except ZeroDivisionError:
        raise PrivilegeError("chart map has a singular linear part") from None
    higher = [Poly(n, {e: v for e, v in c.terms.items() if sum(e) >= 2}) for c in param_map]
    u = [Poly.variable(n, j) for j in range(n)]
    z = [sum((u[j] * a_inv[k][j] for j in range(n)), Poly.zero(n)) for k in range(n)]
    for _ in range(trunc - 1):
        h_of_z = [h.substitute(z, trunc) for h in higher]
        residual = [u[j] - h_of_z[j] for j in range(n)]
        z = [sum((residual[j] * a_inv[k][j] for j in range(n)), Poly.zero(n)).truncate(trunc)
             for k in range(n)]
    shift = [Poly.variable(n, j) - center[j] for j in range(n)]
    return [c.substitute(shift).truncate(trunc) for c in z]


def _privilege_failures(coords: Sequence[Poly], weights: Sequence[int], frame: Frame,
                        center: Sequence[Fraction]) -> List[Tuple[int, OrderValue]]:
    failures = []
    for j, (z, w) in enumerate(zip(coords, weights)):
        order = nonholonomic_order(z, frame, center, w)
        if order != w:
            failures.append((j, order))
    return failures


def build_chart(frame: Frame, point: Sequence[Number], trunc: Optional[int] = None,
                submanifold: Optional[SubmanifoldSpec] = None,
                params: Optional[Sequence[Number]] = None,
                cap: int = DEFAULT_STEP_CAP) -> PrivilegedChart:
    """
    Privileged chart at `point`. Without a submanifold the adapted family of
    flags.adapted_family is flowed in a single factor; with one, the first b
    fields are adapted to the restricted flag of N and flowed first.

    Example:
        chart = build_chart(martinet, [0, 0, 0], submanifold=plane_x1)
        chart.weights      # (1, 3, 1)
    """
    n = frame.dim
    center = tuple(as_rat(v) for v in point)
    profile = growth_vector(frame, center, cap)
    if trunc is None:
        trunc = profile.step + 2
        retry = True
    else:
        retry = False
    if trunc < profile.step:
        raise PreconditionError(f"truncation order {trunc} is below the step {profile.step} at the center")

    if submanifold is None:
        family = adapted_family(frame, center, cap)
        fields = [AdaptedField.single(index, frame) for index in family.indices]
        b = n
    else:
        if params is None:
            params = submanifold.params_of(center)
            if params is None:
                raise PreconditionError(f"point is not on submanifold {submanifold.name}")
        fields = _submanifold_adapted_fields(frame, center, submanifold.tangent_columns(params), cap)
        b = submanifold.dim
    weights = tuple(f.layer for f in fields)
    if sum(weights) != profile.Q:
        raise PreconditionError(f"adapted weights sum to {sum(weights)}, expected Q = {profile.Q}")

    while True:
        logger.info("building privileged chart at %s (weights %s, trunc %d)",
                    [rat_str(v) for v in center], weights, trunc)
        start = [Poly.constant(n, c) for c in center]
        inner = flow_series([f.field for f in fields[:b]], list(range(b)), start, trunc)
        param_map = flow_series([f.field for f in fields[b:]], list(range(b, n)), inner, trunc)
        coords = invert_series(param_map, center, trunc)
        failures = _privilege_failures(coords, weights, frame, center)
        if not failures:
            break
        if not retry:
            raise TruncationError(
                "privilege test failed at truncation order "
                f"{trunc}: " + ", ".join(f"z{j + 1} has order {o}" for j, o in failures))
        logger.warning("privilege test failed at trunc %d, retrying at %d", trunc, trunc + 2)
        trunc += 2
        retry = False
    return PrivilegedChart(center=center, fields=tuple(fields), weights=weights,
                           coords=tuple(coords), param_map=tuple(param_map), trunc=trunc,
                           tangential=b, submanifold=submanifold.name if submanifold else None)


# ---------- Nilpotent approximation ----------

def nilpotentize(frame: Frame, chart: PrivilegedChart) -> NilpotentFrame:
    """Push each X_i through the chart and keep its weighted-degree -1 part."""
    n = frame.dim
    hat_fields: List[VecField] = []
    for i, x in enumerate(frame.fields, 1):
        components = []
        for j, z in enumerate(chart.coords):
            pushed = x.apply(z).substitute(list(chart.param_map), chart.trunc)
            pieces = pushed.weighted_terms(chart.weights)
            below = [d - chart.weights[j] for d in pieces if d - chart.weights[j] < -1]
            if below:
                raise PrivilegeError(
                    f"X{i} has a d/dz{j + 1} term of weighted degree {min(below)} < -1")
            components.append(pieces.get(chart.weights[j] - 1, Poly.zero(n)))
        hat_fields.append(VecField(tuple(components)))
    logger.debug("nilpotent approximation: %s", [f.format(chart.coordinate_names()) for f in hat_fields])
    return NilpotentFrame(Frame(tuple(hat_fields)), chart.weights, chart.center)


@dataclass(frozen=True)
class HatForm:
    """omega_p(Y_1(p), ..., Y_b(p)) and the fields hat Y_i."""
    scalar: Fraction
    fields: Tuple[VecField, ...]
    labels: Tuple[str, ...]


def hat_form(chart: PrivilegedChart, nil_frame: NilpotentFrame,
             submanifold: Optional[SubmanifoldSpec] = None,
             volume: Optional[VolumeForm] = None,
             params: Optional[Sequence[Number]] = None) -> HatForm:
    """
    For b < n, omega is the volume induced by the parametrization of N
    (omega(d phi/d t_1, ..., d phi/d t_b) = 1); for b = n it is varpi.
    hat Y_i = sum over |I| = layer(Y_i) of c_I hat X_I.
    """
    n = chart.dim
    values = [f.field.evaluate(chart.center) for f in chart.fields]
    if rational_rank(values) < n:
        raise DependentFamilyError("adapted fields are linearly dependent at the center")
    b = chart.tangential
    if b < n:
        if submanifold is None:
            raise PreconditionError("a submanifold-adapted chart needs its submanifold")
        if params is None:
            params = submanifold.params_of(chart.center)
        tangent = submanifold.tangent_columns(params)
        rows = [[t[r] for t in tangent] for r in range(n)]
        coeffs = []
        for value in values[:b]:
            c = solve(rows, value)
            if c is None:
                raise DependentFamilyError("adapted tangential field is not tangent to the submanifold")
            coeffs.append(c)
        scalar = rational_det([[coeffs[i][k] for i in range(b)] for k in range(b)])
    else:
        volume = volume or VolumeForm.canonical(n)
        scalar = volume.at(chart.center) * rational_det([[v[r] for v in values] for r in range(n)])

    hat_fields: List[VecField] = []
    labels: List[str] = []
    for f in chart.fields[:b]:
        acc = VecField.zero(n)
        for index, coeff in f.combination:
            if len(index) == f.layer:
                acc = acc + bracket_of(index, nil_frame.frame).scale(coeff)
        hat_fields.append(acc)
        labels.append(f.label())
    return HatForm(scalar, tuple(hat_fields), tuple(labels))
