#   @file flags.py
#   @brief Growth vectors, regular/singular classification, restricted flags on
#          submanifolds, strong equiregularity checks and adapted bracket families.
#   @date 19-Oct-2026

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple

from libs.brackets import BracketEntry, BracketFamily, Frame, iter_bracket_levels
from libs.errors import (EnumerationOverflow, NotBracketGeneratingWithinCap, NotImmersionError,
                         PreconditionError)
from libs.exactalg import (Number, Poly, PolyMatrix, VectorBasis, as_rat, columns_rank, solve)

logger = logging.getLogger(__name__)

DEFAULT_STEP_CAP = 10

# Off-grid rational point used to certify generic rank increases cheaply.
_PROBE_NUMERATORS = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def weighted_dimension(dims: Sequence[int]) -> int:
    """Q = sum_i i * (n_i - n_{i-1}), n_0 = 0."""
    total, prev = 0, 0
    for i, d in enumerate(dims, 1):
        total += i * (d - prev)
        prev = d
    return total


def weighted_dimension_from_codims(dims_n: Sequence[int], b: int) -> int:
    """Same quantity written as sum_{i=0}^{r-1} codim(D^i cap TN) in TN."""
    return sum(b - d for d in (0,) + tuple(dims_n[:-1]))


def _probe_point(nvars: int) -> List[Fraction]:
    return [Fraction(_PROBE_NUMERATORS[i % len(_PROBE_NUMERATORS)],
                     _PROBE_NUMERATORS[(i + 3) % len(_PROBE_NUMERATORS)] + i)
            for i in range(nvars)]


class GenericColumnBasis:
    """
    Columns kept independent over the rational function field. While every kept
    column is still independent at an off-grid rational point, a rank increase
    seen at that point is accepted directly (pointwise rank never exceeds generic
    rank). Once a column has been accepted symbolically the point no longer
    witnesses the kept columns, and the symbolic rank decides every later column.
    """

    def __init__(self, dim: int, nvars: int):
        self.dim = dim
        self.nvars = nvars
        self.columns: List[Tuple[Poly, ...]] = []
        self._point = _probe_point(nvars)
        self._pointwise = VectorBasis(dim)

    @property
    def rank(self) -> int:
        return len(self.columns)

    def add(self, column: Sequence[Poly]) -> bool:
        column = tuple(column)
        if len(self.columns) >= self.dim or all(c.is_zero() for c in column):
            return False
        if self._pointwise.rank == len(self.columns):
            if self._pointwise.add([c.evaluate(self._point) for c in column]):
                self.columns.append(column)
                return True
        matrix = PolyMatrix.from_columns(self.columns + [column])
        if matrix.generic_rank() > len(self.columns):
            self.columns.append(column)
            return True
        return False


@dataclass(frozen=True)
class GrowthProfile:
    dims: Tuple[int, ...]
    point: Optional[Tuple[Fraction, ...]] = None

    @property
    def step(self) -> int:
        return len(self.dims)

    @property
    def Q(self) -> int:
        return weighted_dimension(self.dims)

    @property
    def increments(self) -> Tuple[int, ...]:
        return tuple(d - p for d, p in zip(self.dims, (0,) + self.dims[:-1]))


class PointClass(Enum):
    REGULAR = "Regular"
    SINGULAR = "Singular"


def growth_vector(frame: Frame, point: Sequence[Number], cap: int = DEFAULT_STEP_CAP) -> GrowthProfile:
    """n_i(q) = rank of all brackets of length <= i at q, up to the first i with n_i = n."""
    if cap < 1:
        raise ValueError("cap must be >= 1")
    n = frame.dim
    pt = tuple(as_rat(v) for v in point)
    basis = VectorBasis(n)
    dims: List[int] = []
    for length, level in enumerate(iter_bracket_levels(frame), 1):
        if length > cap:
            break
        for entry in level:
            if basis.rank == n:
                break
            basis.add(entry.field.evaluate(pt))
        dims.append(basis.rank)
        if basis.rank == n:
            return GrowthProfile(tuple(dims), pt)
    raise NotBracketGeneratingWithinCap(
        f"brackets of length <= {cap} span only {basis.rank} of {n} dimensions at {_fmt_point(pt)}")


def generic_growth(frame: Frame, cap: int = DEFAULT_STEP_CAP) -> GrowthProfile:
    """Growth vector over the field of rational functions (the regular-point value)."""
    n = frame.dim
    basis = GenericColumnBasis(n, n)
    dims: List[int] = []
    for length, level in enumerate(iter_bracket_levels(frame), 1):
        if length > cap:
            break
        for entry in level:
            if basis.rank == n:
                break
            basis.add(entry.field.components)
        dims.append(basis.rank)
        if basis.rank == n:
            return GrowthProfile(tuple(dims))
    raise NotBracketGeneratingWithinCap(f"generic growth does not reach {n} within {cap} steps")


def classify_point(frame: Frame, point: Sequence[Number], cap: int = DEFAULT_STEP_CAP,
                   generic: Optional[GrowthProfile] = None) -> PointClass:
    """Regular iff every n_i(q) equals its generic value."""
    profile = growth_vector(frame, point, cap)
    generic = generic or generic_growth(frame, cap)
    return PointClass.REGULAR if profile.dims == generic.dims else PointClass.SINGULAR


def adapted_family(frame: Frame, point: Sequence[Number], cap: int = DEFAULT_STEP_CAP) -> BracketFamily:
    """Greedy adapted basis at q: shortest brackets first, lexicographic tie-break."""
    n = frame.dim
    pt = tuple(as_rat(v) for v in point)
    basis = VectorBasis(n)
    chosen: List[Tuple[int, ...]] = []
    for length, level in enumerate(iter_bracket_levels(frame), 1):
        if length > cap or basis.rank == n:
            break
        for entry in level:
            if basis.add(entry.field.evaluate(pt)):
                chosen.append(entry.index)
                if basis.rank == n:
                    break
    if basis.rank < n:
        raise NotBracketGeneratingWithinCap(f"no adapted basis within {cap} steps at {_fmt_point(pt)}")
    return BracketFamily(tuple(chosen))


# ---------- Submanifolds ----------

@dataclass(frozen=True)
class SubmanifoldSpec:
    """
    Parametrized submanifold t -> phi(t) of R^n with b parameters. A coordinate
    subspace {x_j = 0, j in zeroed} is the special case phi(t) = (free coords).
    """
    name: str
    ambient_dim: int
    phi: Tuple[Poly, ...]
    param_names: Tuple[str, ...]
    zeroed: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "phi", tuple(self.phi))
        object.__setattr__(self, "param_names", tuple(self.param_names))
        if len(self.phi) != self.ambient_dim:
            raise PreconditionError(f"submanifold {self.name}: parametrization needs {self.ambient_dim} components")
        if not self.param_names:
            raise PreconditionError(f"submanifold {self.name}: needs at least one parameter")
        for comp in self.phi:
            if comp.nvars != len(self.param_names):
                raise PreconditionError(f"submanifold {self.name}: component not in the parameter ring")

    @classmethod
    def coordinate_subspace(cls, name: str, n: int, zeroed: Sequence[int],
                            coordinate_names: Optional[Sequence[str]] = None) -> "SubmanifoldSpec":
        zeroed = tuple(sorted(set(zeroed)))
        free = [j for j in range(n) if j not in zeroed]
        b = len(free)
        names = list(coordinate_names) if coordinate_names else [f"x{j + 1}" for j in range(n)]
        phi = []
        for j in range(n):
            if j in zeroed:
                phi.append(Poly.zero(b))
            else:
                phi.append(Poly.variable(b, free.index(j)))
        return cls(name, n, tuple(phi), tuple(names[j] for j in free), zeroed)

    @classmethod
    def whole_space(cls, name: str, n: int) -> "SubmanifoldSpec":
        return cls.coordinate_subspace(name, n, ())

    @property
    def kind(self) -> str:
        return "coordinate_subspace" if self.zeroed is not None else "parametrized"

    @property
    def dim(self) -> int:
        return len(self.param_names)

    def point_at(self, params: Sequence[Number]) -> Tuple[Fraction, ...]:
        return tuple(c.evaluate(params) for c in self.phi)

    def jacobian(self) -> PolyMatrix:
        """n x b matrix d phi_j / d t_k."""
        return PolyMatrix([[c.partial(k) for k in range(self.dim)] for c in self.phi])

    def tangent_columns(self, params: Sequence[Number]) -> List[List[Fraction]]:
        values = self.jacobian().evaluate(params)
        return [[values[j][k] for j in range(self.ambient_dim)] for k in range(self.dim)]

    def is_affine(self) -> bool:
        return all(c.degree() <= 1 for c in self.phi)

    def params_of(self, point: Sequence[Number]) -> Optional[Tuple[Fraction, ...]]:
        """Parameter values of a point of N, or None if the point is not on N."""
        pt = [as_rat(v) for v in point]
        if len(pt) != self.ambient_dim:
            raise PreconditionError(f"point has {len(pt)} coordinates, expected {self.ambient_dim}")
        if self.zeroed is not None:
            if any(pt[j] != 0 for j in self.zeroed):
                return None
            return tuple(pt[j] for j in range(self.ambient_dim) if j not in self.zeroed)
        if not self.is_affine():
            raise PreconditionError(
                f"membership in the non-affine submanifold {self.name} cannot be decided from a point; "
                "give parameter values instead")
        origin = [c.constant_term() for c in self.phi]
        jac = self.jacobian().evaluate([0] * self.dim)
        params = solve(jac, [p - o for p, o in zip(pt, origin)])
        if params is None or list(self.point_at(params)) != pt:
            return None
        return tuple(params)

    def contains(self, point: Sequence[Number]) -> bool:
        return self.params_of(point) is not None

    def check_immersion(self) -> None:
        if self.jacobian().generic_rank() < self.dim:
            raise NotImmersionError(f"submanifold {self.name}: parametrization Jacobian has generic rank < {self.dim}")


@dataclass(frozen=True)
class RestrictedProfile:
    dims: Tuple[int, ...]
    dims_n: Tuple[int, ...]
    b: int
    point: Tuple[Fraction, ...]
    params: Tuple[Fraction, ...]

    @property
    def Q(self) -> int:
        return weighted_dimension(self.dims)

    @property
    def Q_N(self) -> int:
        return weighted_dimension(self.dims_n)

    @property
    def r_not_n(self) -> int:
        """Largest layer where the ambient flag grows strictly faster than the restricted one."""
        best = 0
        prev, prev_n = 0, 0
        for i, (d, dn) in enumerate(zip(self.dims, self.dims_n), 1):
            if d - prev > dn - prev_n:
                best = i
            prev, prev_n = d, dn
        return best


def restricted_profile(frame: Frame, submanifold: SubmanifoldSpec, params: Sequence[Number],
                       cap: int = DEFAULT_STEP_CAP) -> RestrictedProfile:
    """n_i^N(q) = rank(A_i) + rank(B) - rank([A_i | B]) at q = phi(params)."""
    n = frame.dim
    t = tuple(as_rat(v) for v in params)
    q = submanifold.point_at(t)
    tangent = submanifold.tangent_columns(t)
    if columns_rank(tangent, n) < submanifold.dim:
        raise NotImmersionError(
            f"submanifold {submanifold.name} is not immersed at parameters {_fmt_point(t)}")
    b = submanifold.dim
    ambient = VectorBasis(n)
    joint = VectorBasis(n)
    for col in tangent:
        joint.add(col)
    dims: List[int] = []
    dims_n: List[int] = []
    for length, level in enumerate(iter_bracket_levels(frame), 1):
        if length > cap:
            break
        for entry in level:
            if ambient.rank == n:
                break
            value = entry.field.evaluate(q)
            ambient.add(value)
            joint.add(value)
        dims.append(ambient.rank)
        dims_n.append(ambient.rank + b - joint.rank)
        if ambient.rank == n:
            return RestrictedProfile(tuple(dims), tuple(dims_n), b, q, t)
    raise NotBracketGeneratingWithinCap(f"flag does not reach dimension {n} within {cap} steps at {_fmt_point(q)}")


def _rank_never_drops(columns: Sequence[Tuple[Poly, ...]]) -> bool:
    """True if some maximal minor of these independent columns is a nonzero constant."""
    if not columns:
        return True
    size = len(columns)
    for rows in itertools.combinations(range(len(columns[0])), size):
        det = PolyMatrix([[col[r] for col in columns] for r in rows]).det()
        if det.is_constant() and not det.is_zero():
            return True
    return False


@dataclass(frozen=True)
class GenericRestrictedFlag:
    dims: Tuple[int, ...]
    dims_n: Tuple[int, ...]
    # every rank in the flag is constant over the whole parameter domain of N
    constant_on_n: bool


def generic_restricted_profile(frame: Frame, submanifold: SubmanifoldSpec,
                               cap: int = DEFAULT_STEP_CAP) -> GenericRestrictedFlag:
    """
    (n_i, n_i^N) over the function field of N, after substituting the parametrization.

    The ranks of the Jacobian, of each ambient layer and of each layer joined
    with TN are certified constant on N when a maximal minor of the chosen
    generic columns is a nonzero constant polynomial in the parameters.
    """
    n = frame.dim
    b = submanifold.dim
    jac = submanifold.jacobian()
    ambient = GenericColumnBasis(n, b)
    joint = GenericColumnBasis(n, b)
    for k in range(b):
        joint.add(jac.column(k))
    constant = _rank_never_drops(joint.columns)
    dims: List[int] = []
    dims_n: List[int] = []
    for length, level in enumerate(iter_bracket_levels(frame), 1):
        if length > cap:
            break
        for entry in level:
            if ambient.rank == n:
                break
            column = tuple(c.substitute(submanifold.phi) for c in entry.field.components)
            ambient.add(column)
            joint.add(column)
        dims.append(ambient.rank)
        dims_n.append(ambient.rank + b - joint.rank)
        constant = constant and _rank_never_drops(ambient.columns) and _rank_never_drops(joint.columns)
        if ambient.rank == n:
            return GenericRestrictedFlag(tuple(dims), tuple(dims_n), constant)
    raise NotBracketGeneratingWithinCap(f"generic flag on {submanifold.name} does not close within {cap} steps")


def sample_grid(b: int, count: int, box: Number = 1, center: Optional[Sequence[Number]] = None
                ) -> List[Tuple[Fraction, ...]]:
    """Deterministic rational Halton points in center + [-box, box]^b."""
    primes = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]
    box = as_rat(box)
    center = [as_rat(c) for c in center] if center is not None else [Fraction(0)] * b
    points = []
    for index in range(1, count + 1):
        coords = []
        for axis in range(b):
            base = primes[axis % len(primes)]
            value, denom, k = Fraction(0), Fraction(1), index
            while k:
                denom *= base
                value += Fraction(k % base) / denom
                k //= base
            coords.append(center[axis] + box * (2 * value - 1))
        points.append(tuple(coords))
    return points


@dataclass
class EquiregularityReport:
    holds_on_samples: bool
    # strong equiregularity holds on all of N, not only at the samples
    generic_confirmed: bool
    equiregular: bool
    generic_dims: Tuple[int, ...]
    generic_dims_n: Tuple[int, ...]
    profiles: List[RestrictedProfile] = field(default_factory=list)
    witnesses: List[Dict[str, object]] = field(default_factory=list)

    @property
    def Q_N_generic(self) -> int:
        return weighted_dimension(self.generic_dims_n)

    @property
    def Q_N_bar(self) -> int:
        """max of Q_N over the generic value and every sampled point."""
        return max([self.Q_N_generic] + [p.Q_N for p in self.profiles])


def strong_equireg_check(frame: Frame, submanifold: SubmanifoldSpec,
                         samples: Sequence[Sequence[Number]], cap: int = DEFAULT_STEP_CAP
                         ) -> EquiregularityReport:
    """
    Both n_i and n_i^N must be constant over the samples and equal to their
    generic values on N. The result is generically confirmed when, in addition,
    every rank in the generic flag is certified constant on N.
    """
    if not samples:
        raise PreconditionError("strong equiregularity check needs at least one sample")
    flag = generic_restricted_profile(frame, submanifold, cap)
    generic_dims, generic_dims_n = flag.dims, flag.dims_n
    profiles: List[RestrictedProfile] = []
    witnesses: List[Dict[str, object]] = []
    equiregular = True
    holds = True
    for params in samples:
        try:
            profile = restricted_profile(frame, submanifold, params, cap)
        except NotImmersionError as exc:
            holds = False
            witnesses.append({"params": tuple(as_rat(v) for v in params), "reason": str(exc)})
            continue
        profiles.append(profile)
        if profile.dims != generic_dims:
            equiregular = False
        if profile.dims != generic_dims or profile.dims_n != generic_dims_n:
            holds = False
            witnesses.append({"params": profile.params, "point": profile.point,
                              "dims": profile.dims, "dims_n": profile.dims_n})
    logger.info("submanifold %s: generic flag %s / %s, %d of %d samples deviate, constant ranks %s",
                submanifold.name, generic_dims, generic_dims_n, len(witnesses), len(samples),
                "certified" if flag.constant_on_n else "not certified")
    return EquiregularityReport(holds_on_samples=holds, generic_confirmed=holds and flag.constant_on_n,
                                equiregular=equiregular,
                                generic_dims=generic_dims, generic_dims_n=generic_dims_n,
                                profiles=profiles, witnesses=witnesses)


# ---------- Singular locus helpers ----------

def rank_drop_minors(frame: Frame, layer: int, budget: int = 5000) -> List[Poly]:
    """
    Distinct (up to sign) nonzero maximal minors of the layer-`layer` bracket
    matrix, sized by its generic rank. Their common zero set is where n_layer drops.
    """
    n = frame.dim
    columns: List[Tuple[Poly, ...]] = []
    seen = set()
    for length, level in enumerate(iter_bracket_levels(frame), 1):
        if length > layer:
            break
        for entry in level:
            key = entry.field.components
            neg = tuple(-c for c in key)
            if key in seen or neg in seen:
                continue
            seen.add(key)
            columns.append(key)
    if not columns:
        return []
    basis = GenericColumnBasis(n, n)
    for col in columns:
        basis.add(col)
    size = basis.rank
    count = comb(n, size) * comb(len(columns), size)
    if count > budget:
        raise EnumerationOverflow(f"{count} minors of size {size} exceed the budget of {budget}")
    minors: List[Poly] = []
    found = set()
    for rows in itertools.combinations(range(n), size):
        for cols in itertools.combinations(range(len(columns)), size):
            det = PolyMatrix([[columns[c][r] for c in cols] for r in rows]).det()
            if det.is_zero() or det in found or -det in found:
                continue
            found.add(det)
            minors.append(det)
    return minors


@dataclass
class SurrogateReport:
    """Algebraic stand-in for the ball condition 'B(p, rho) cap Sigma is inside N'."""
    holds: bool
    singular_off_n: List[Tuple[Fraction, ...]] = field(default_factory=list)
    regular_on_n: List[Tuple[Fraction, ...]] = field(default_factory=list)
    checked: int = 0


def singular_locus_check(frame: Frame, submanifold: SubmanifoldSpec, point: Sequence[Number],
                         box: Number = Fraction(1, 2), samples: int = 16, cap: int = DEFAULT_STEP_CAP,
                         generic: Optional[GrowthProfile] = None) -> SurrogateReport:
    """
    Samples of N near p must be singular; box samples off N and small transversal
    offsets of p must be regular.
    """
    pt = tuple(as_rat(v) for v in point)
    params = submanifold.params_of(pt)
    if params is None:
        raise PreconditionError(f"point {_fmt_point(pt)} is not on {submanifold.name}")
    generic = generic or generic_growth(frame, cap)
    report = SurrogateReport(holds=True)
    for t in sample_grid(submanifold.dim, samples, box, params):
        q = submanifold.point_at(t)
        report.checked += 1
        if growth_vector(frame, q, cap).dims == generic.dims:
            report.regular_on_n.append(q)
    off_points = list(sample_grid(frame.dim, samples, box, pt))
    for axis in range(frame.dim):
        for k in range(1, 4):
            shifted = list(pt)
            shifted[axis] += as_rat(box) / 2 ** k
            off_points.append(tuple(shifted))
    for q in off_points:
        if submanifold.contains(q):
            continue
        report.checked += 1
        if growth_vector(frame, q, cap).dims != generic.dims:
            report.singular_off_n.append(q)
    report.holds = not report.singular_off_n and not report.regular_on_n
    return report


def _fmt_point(point: Sequence[Fraction]) -> str:
    return "(" + ", ".join(str(v) for v in point) + ")"
