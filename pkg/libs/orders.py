#   @file orders.py
#   @brief Nonholonomic orders, volume determinants of bracket families, the
#          exponents sigma-/sigma+/sigma and the nu_q quantity.
#   @date 19-Oct-2026

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from libs.brackets import BracketFamily, Frame, VecField, bracket_of, nonzero_brackets
from libs.errors import EnumerationOverflow, NotRegularError, PreconditionError
from libs.exactalg import Number, Poly, PolyMatrix, PolySpan, as_rat, rational_det
from libs.flags import DEFAULT_STEP_CAP, SubmanifoldSpec, growth_vector, sample_grid

logger = logging.getLogger(__name__)

DEFAULT_FAMILY_BUDGET = 20000


@dataclass(frozen=True)
class AboveCap:
    """Every derivative word of length <= cap vanished; the order is > cap."""
    cap: int

    def __str__(self) -> str:
        return f">{self.cap}"


OrderValue = Union[int, AboveCap]


def order_key(value: OrderValue) -> float:
    """Sort key placing AboveCap after every finite order."""
    return float("inf") if isinstance(value, AboveCap) else value


@dataclass(frozen=True)
class VolumeForm:
    """varpi = density * dx1 ^ ... ^ dxn."""
    density: Poly

    def __post_init__(self):
        if self.density.is_zero():
            raise PreconditionError("volume density must not be identically zero")

    @classmethod
    def canonical(cls, n: int) -> "VolumeForm":
        return cls(Poly.one(n))

    @property
    def dim(self) -> int:
        return self.density.nvars

    def at(self, point: Sequence[Number]) -> Fraction:
        return self.density.evaluate(point)


# ---------- Nonholonomic orders ----------

class DerivativeLevels:
    """
    Linear spans L_j = span{X_I f : |I| = j}, built level by level. L_{j+1} is
    spanned by X_i applied to a basis of L_j, so each level stays small.
    """

    def __init__(self, f: Poly, frame: Frame):
        if f.nvars != frame.dim:
            raise PreconditionError("function and frame live in different dimensions")
        self.frame = frame
        self.levels: List[List[Poly]] = [[f] if not f.is_zero() else []]

    def level(self, j: int) -> List[Poly]:
        while len(self.levels) <= j:
            span = PolySpan()
            for g in self.levels[-1]:
                for x in self.frame.fields:
                    span.add(x.apply(g))
            self.levels.append(list(span.basis))
        return self.levels[j]

    def order(self, nonzero, cap: int) -> OrderValue:
        """Smallest j <= cap with nonzero(g) for some g in L_j."""
        for j in range(cap + 1):
            basis = self.level(j)
            if not basis:
                return AboveCap(cap)
            if any(nonzero(g) for g in basis):
                return j
        return AboveCap(cap)


def nonholonomic_order(f: Poly, frame: Frame, point: Sequence[Number], cap: int) -> OrderValue:
    """Smallest j such that (X_i1 ... X_ij f)(point) != 0 for some word; AboveCap past cap."""
    if cap < 0:
        raise ValueError("cap must be >= 0")
    pt = [as_rat(v) for v in point]
    return DerivativeLevels(f, frame).order(lambda g: g.evaluate(pt) != 0, cap)


def generic_order_along(f: Poly, frame: Frame, submanifold: SubmanifoldSpec, cap: int) -> OrderValue:
    """Order at a generic point of N: the first level with a member not vanishing identically on N."""
    return DerivativeLevels(f, frame).order(lambda g: not g.substitute(submanifold.phi).is_zero(), cap)


# ---------- Bracket families ----------

def family_volume(family: BracketFamily, frame: Frame, volume: VolumeForm) -> Poly:
    """density * det[X_I1 | ... | X_In]."""
    n = frame.dim
    if len(family) != n:
        raise PreconditionError(f"a family needs {n} members, got {len(family)}")
    columns = [bracket_of(index, frame).components for index in family.indices]
    return volume.density * PolyMatrix.from_columns(columns).det()


def _length_profiles(total: int, members: int, max_len: int) -> List[Tuple[int, ...]]:
    """Nondecreasing tuples of `members` lengths in 1..max_len summing to total."""
    result: List[Tuple[int, ...]] = []

    def extend(prefix: Tuple[int, ...], remaining: int, lowest: int) -> None:
        slots = members - len(prefix)
        if slots == 0:
            if remaining == 0:
                result.append(prefix)
            return
        for length in range(lowest, max_len + 1):
            if length * slots > remaining:
                break
            extend(prefix + (length,), remaining - length, length)

    extend((), total, 1)
    return result


def enumerate_families(frame: Frame, q_ref: int, max_len: int,
                       budget: int = DEFAULT_FAMILY_BUDGET) -> List[Tuple[BracketFamily, Poly]]:
    """
    Families of n brackets with total length q_ref and member lengths <= max_len,
    paired with their (unweighted) bracket determinant. Permutations and members
    equal up to sign are collapsed; families with identically zero determinant
    are dropped.
    """
    n = frame.dim
    if q_ref < n:
        raise PreconditionError(f"no family of {n} brackets has total length {q_ref}")
    by_length: Dict[int, List[Tuple[Tuple[int, ...], VecField]]] = {}
    seen = set()
    for entry in nonzero_brackets(frame, max_len):
        key = entry.field.components
        if key in seen or tuple(-c for c in key) in seen:
            continue
        seen.add(key)
        by_length.setdefault(len(entry.index), []).append((entry.index, entry.field))
    profiles = _length_profiles(q_ref, n, max_len)
    count = 0
    for profile in profiles:
        product = 1
        for length, group in itertools.groupby(profile):
            product *= _comb(len(by_length.get(length, [])), len(list(group)))
        count += product
    if count > budget:
        raise EnumerationOverflow(
            f"{count} bracket families of total length {q_ref} exceed the budget of {budget}")
    logger.info("enumerating %d candidate families (total length %d, member length <= %d)",
                count, q_ref, max_len)
    families: List[Tuple[BracketFamily, Poly]] = []
    for profile in profiles:
        choices = []
        for length, group in itertools.groupby(profile):
            choices.append(itertools.combinations(by_length.get(length, []), len(list(group))))
        for combo in itertools.product(*[list(c) for c in choices]):
            members = [m for part in combo for m in part]
            det = PolyMatrix.from_columns([vec.components for _, vec in members]).det()
            if det.is_zero():
                continue
            families.append((BracketFamily(tuple(idx for idx, _ in members)), det))
    logger.debug("%d families with nonzero determinant", len(families))
    return families


def default_bracket_len(step: int, q_ref: int, n: int) -> int:
    return max(1, min(step, q_ref - n + 1))


# ---------- sigma ----------

@dataclass
class FamilyOrder:
    family: BracketFamily
    volume: Poly
    generic_order: OrderValue
    sampled_orders: List[OrderValue] = field(default_factory=list)


@dataclass
class OrderResult:
    """sigma- <= sigma+; sigma is defined exactly when they agree."""
    sigma_minus: OrderValue
    sigma_plus: OrderValue
    sigma: Optional[int]
    witnesses: List[BracketFamily]
    families: List[FamilyOrder]
    order_cap: int
    bracket_len: int
    q_ref: int
    sampled: bool = True
    samples: List[Tuple[Fraction, ...]] = field(default_factory=list)

    @property
    def defined(self) -> bool:
        return self.sigma is not None


def sigma_bounds(frame: Frame, volume: VolumeForm, submanifold: SubmanifoldSpec, q_ref: int,
                 order_cap: Optional[int] = None, bracket_len: Optional[int] = None,
                 samples: Optional[Sequence[Sequence[Number]]] = None, sample_count: int = 8,
                 step_cap: int = DEFAULT_STEP_CAP,
                 budget: int = DEFAULT_FAMILY_BUDGET) -> OrderResult:
    """
    sigma- = min over families of the generic order of varpi(X_I1, ..., X_In) along N.
    sigma+ = max over sample points q of min over families of the order at q.
    Sample points are parameter values on N; the deterministic grid is used
    when none are given.
    """
    n = frame.dim
    if samples is None or not len(samples):
        samples = sample_grid(submanifold.dim, sample_count)
    params = [tuple(as_rat(v) for v in s) for s in samples]
    points = [submanifold.point_at(t) for t in params]
    if order_cap is None:
        order_cap = 2 * max(growth_vector(frame, q, step_cap).Q for q in points)
    if bracket_len is None:
        step = max(growth_vector(frame, q, step_cap).step for q in points)
        bracket_len = default_bracket_len(step, q_ref, n)
    families = enumerate_families(frame, q_ref, bracket_len, budget)
    if not families:
        raise NotRegularError(f"every family of total length {q_ref} has zero volume")

    results: List[FamilyOrder] = []
    for family, det in families:
        g = volume.density * det
        levels = DerivativeLevels(g, frame)
        generic = levels.order(lambda h: not h.substitute(submanifold.phi).is_zero(), order_cap)
        pointwise = []
        for q in points:
            pointwise.append(levels.order(lambda h, q=q: h.evaluate(q) != 0, order_cap))
        results.append(FamilyOrder(family, g, generic, pointwise))
        logger.debug("family %s: generic order %s, sampled %s", family.label(), generic,
                     [str(o) for o in pointwise])

    sigma_minus = min((r.generic_order for r in results), key=order_key)
    per_point = [min((r.sampled_orders[k] for r in results), key=order_key) for k in range(len(points))]
    # on N the pointwise order of each family is >= its generic order, so sigma+ >= sigma-
    sigma_plus = max(per_point, key=order_key)
    sigma = None
    if not isinstance(sigma_minus, AboveCap) and sigma_minus == sigma_plus:
        sigma = sigma_minus
    witnesses = [r.family for r in results if r.generic_order == sigma_minus]
    logger.info("sigma- = %s, sigma+ = %s over %d families and %d samples",
                sigma_minus, sigma_plus, len(results), len(points))
    return OrderResult(sigma_minus=sigma_minus, sigma_plus=sigma_plus, sigma=sigma,
                       witnesses=witnesses, families=results, order_cap=order_cap,
                       bracket_len=bracket_len, q_ref=q_ref, sampled=True, samples=params)


# ---------- nu_q ----------

@dataclass
class NuValue:
    value: Fraction
    argmax: List[BracketFamily]
    point: Tuple[Fraction, ...]


def nu_at(frame: Frame, volume: VolumeForm, point: Sequence[Number], q_ref: int,
          bracket_len: Optional[int] = None, budget: int = DEFAULT_FAMILY_BUDGET) -> NuValue:
    """max over families of total length q_ref of |varpi_q(X_I1(q), ..., X_In(q))|."""
    n = frame.dim
    pt = tuple(as_rat(v) for v in point)
    if bracket_len is None:
        bracket_len = q_ref - n + 1
    density = volume.at(pt)
    best = Fraction(0)
    argmax: List[BracketFamily] = []
    for family, det in enumerate_families(frame, q_ref, bracket_len, budget):
        value = abs(density * det.evaluate(pt))
        if value == 0:
            continue
        if value > best:
            best, argmax = value, [family]
        elif value == best:
            argmax.append(family)
    if best == 0:
        raise NotRegularError(
            f"every family of total length {q_ref} vanishes at {pt}; the point is not regular for this length")
    return NuValue(best, argmax, pt)


def nu_polynomials(frame: Frame, volume: VolumeForm, q_ref: int, bracket_len: Optional[int] = None,
                   budget: int = DEFAULT_FAMILY_BUDGET) -> List[Tuple[BracketFamily, Poly]]:
    """The polynomials varpi(X_I1, ..., X_In) whose pointwise max in absolute value is nu_q."""
    if bracket_len is None:
        bracket_len = q_ref - frame.dim + 1
    return [(family, volume.density * det)
            for family, det in enumerate_families(frame, q_ref, bracket_len, budget)]


def nu_on_submanifold(frame: Frame, volume: VolumeForm, submanifold: SubmanifoldSpec,
                      params: Sequence[Number], q_ref: Optional[int] = None,
                      step_cap: int = DEFAULT_STEP_CAP,
                      budget: int = DEFAULT_FAMILY_BUDGET) -> NuValue:
    """
    nu_q for a b-dimensional N with omega the volume induced by the
    parametrization. For an n-tuple of the varpi-argmax set, the value of
    omega ^ dX_I(b+1) ^ ... ^ dX_In on (X_I1, ..., X_In) is
    det[X_I1..X_In] / det[t_1..t_b, X_I(b+1)..X_In], t_k = d phi / d t_k;
    the max runs over every choice of the n-b transversal members.
    """
    n = frame.dim
    b = submanifold.dim
    t = tuple(as_rat(v) for v in params)
    q = submanifold.point_at(t)
    if q_ref is None:
        q_ref = growth_vector(frame, q, step_cap).Q
    if b == n:
        return nu_at(frame, volume, q, q_ref, budget=budget)
    base = nu_at(frame, volume, q, q_ref, budget=budget)
    tangent = submanifold.tangent_columns(t)
    best = Fraction(0)
    argmax: List[BracketFamily] = []
    for family in base.argmax:
        columns = [bracket_of(index, frame).evaluate(q) for index in family.indices]
        full = rational_det([[col[r] for col in columns] for r in range(n)])
        for transversal in itertools.combinations(range(n), n - b):
            cols = tangent + [columns[j] for j in transversal]
            denom = rational_det([[col[r] for col in cols] for r in range(n)])
            if denom == 0:
                continue
            value = abs(full / denom)
            if value > best:
                best, argmax = value, [family]
            elif value == best and family not in argmax:
                argmax.append(family)
    if best == 0:
        raise NotRegularError(f"no transversal completion of the argmax families at {q}")
    return NuValue(best, argmax, q)


def _comb(n: int, k: int) -> int:
    from math import comb
    return comb(n, k) if 0 <= k <= n else 0
