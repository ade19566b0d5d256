#   @file exactalg.py
#   @brief Exact rational arithmetic and multivariate polynomials over QQ, built
#          on sympy's sparse polynomial rings and matrices. Determinants of
#          polynomial matrices are fraction-free (Bareiss) over the ring.
#   @date 19-Oct-2026

from __future__ import annotations

import functools
from fractions import Fraction
from types import MappingProxyType
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from sympy import Matrix, Rational, symbols
from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.orderings import grlex
from sympy.polys.polyerrors import ExactQuotientFailed
from sympy.polys.rings import PolyElement, PolyRing

from libs.errors import ArityError, UninstantiatedParameterError

Rat = Fraction
Exponent = Tuple[int, ...]
Number = Union[int, Fraction]


def as_rat(value) -> Fraction:
    """Coerce ints, Fractions and 'p/q' strings into a reduced Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, (int, str)):
        return Fraction(value)
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


def rat_str(value: Fraction) -> str:
    """Canonical 'p/q' (or 'p') spelling used in reports."""
    value = as_rat(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def grlex_key(exponent: Exponent) -> Tuple[int, Exponent]:
    return (sum(exponent), exponent)


# ---------- Conversions between Fraction and sympy ----------

def _qq(value) -> object:
    value = as_rat(value)
    return QQ(value.numerator, value.denominator)


def _from_qq(value) -> Fraction:
    return Fraction(int(QQ.numer(value)), int(QQ.denom(value)))


def _sym(value) -> Rational:
    value = as_rat(value)
    return Rational(value.numerator, value.denominator)


def _from_sym(value) -> Fraction:
    value = Rational(value)
    return Fraction(int(value.p), int(value.q))


@functools.lru_cache(maxsize=None)
def poly_ring(nvars: int, params: Tuple[str, ...] = ()) -> PolyRing:
    """
    Sparse polynomial ring QQ[x_0..x_{n-1}, params] in grlex order.
    A ring with no slots at all gets one unused generator.
    """
    names = [f"_x{i}" for i in range(nvars)] + [f"_k_{name}" for name in params]
    return PolyRing(symbols(names or ["_unused"]), QQ, grlex)


class Poly:
    """
    Multivariate polynomial with exact rational coefficients.

    Wraps a sympy PolyElement. Variables are numbered 0..nvars-1; optional named
    parameters occupy trailing exponent slots and must be bound before any
    evaluation. Exponents seen from outside always have length nvars + len(params).

    Example:
        x1 = Poly.variable(3, 0)
        p = x1 ** 2 * Fraction(1, 2)
        p.evaluate([1, 0, 0])      # Fraction(1, 2)
        p.partial(0)               # x1
    """

    __slots__ = ("nvars", "params", "rep", "_terms", "_hash")

    def __init__(self, nvars: int, terms: Optional[Mapping[Sequence[int], Number]] = None,
                 params: Sequence[str] = ()):
        params = tuple(params)
        width = nvars + len(params)
        ring = poly_ring(nvars, params)
        pad = (0,) * (ring.ngens - width)
        clean = {}
        for exponent, coeff in (terms or {}).items():
            exponent = tuple(exponent)
            if len(exponent) != width:
                raise ArityError(f"exponent {exponent} does not have length {width}")
            clean[exponent + pad] = _qq(coeff)
        self._init(nvars, params, ring.from_dict(clean))

    def _init(self, nvars: int, params: Tuple[str, ...], rep: PolyElement) -> None:
        self.nvars = nvars
        self.params = params
        self.rep = rep
        self._terms: Optional[Dict[Exponent, Fraction]] = None
        self._hash: Optional[int] = None

    def _wrap(self, rep: PolyElement) -> "Poly":
        poly = Poly.__new__(Poly)
        poly._init(self.nvars, self.params, rep)
        return poly

    # ---------- Constructors ----------
    @classmethod
    def zero(cls, nvars: int, params: Sequence[str] = ()) -> "Poly":
        return cls(nvars, {}, params)

    @classmethod
    def constant(cls, nvars: int, value: Number, params: Sequence[str] = ()) -> "Poly":
        width = nvars + len(params)
        return cls(nvars, {(0,) * width: value}, params)

    @classmethod
    def one(cls, nvars: int, params: Sequence[str] = ()) -> "Poly":
        return cls.constant(nvars, 1, params)

    @classmethod
    def variable(cls, nvars: int, axis: int, params: Sequence[str] = ()) -> "Poly":
        width = nvars + len(params)
        if not 0 <= axis < width:
            raise ArityError(f"variable index {axis} out of range for {width} slots")
        exponent = [0] * width
        exponent[axis] = 1
        return cls(nvars, {tuple(exponent): 1}, params)

    # ---------- Basic accessors ----------
    @property
    def ring(self) -> PolyRing:
        return self.rep.ring

    @property
    def width(self) -> int:
        return self.nvars + len(self.params)

    @property
    def terms(self) -> Mapping[Exponent, Fraction]:
        if self._terms is None:
            width = self.width
            self._terms = {m[:width]: _from_qq(c) for m, c in self.rep.items()}
        return MappingProxyType(self._terms)

    def is_zero(self) -> bool:
        return not self.rep

    def is_constant(self) -> bool:
        return self.rep.is_ground

    def constant_term(self) -> Fraction:
        return _from_qq(self.rep.get(self.ring.zero_monom, QQ.zero))

    def degree(self, axes: Optional[Iterable[int]] = None) -> int:
        """Total degree (restricted to `axes` if given); -1 for the zero polynomial."""
        if not self.rep:
            return -1
        if axes is None:
            return max(sum(m) for m in self.rep.itermonoms())
        axes = tuple(axes)
        return max(sum(m[a] for a in axes) for m in self.rep.itermonoms())

    def uses_parameters(self) -> bool:
        return any(any(m[self.nvars:self.width]) for m in self.rep.itermonoms())

    def sorted_terms(self) -> List[Tuple[Exponent, Fraction]]:
        """Terms in descending graded-lexicographic order."""
        width = self.width
        return [(m[:width], _from_qq(c)) for m, c in self.rep.terms()]

    # ---------- Arithmetic ----------
    def _same_ring(self, other: "Poly") -> None:
        if self.nvars != other.nvars or self.params != other.params:
            raise ArityError(
                f"polynomials live in different rings ({self.nvars}, {self.params}) "
                f"vs ({other.nvars}, {other.params})")

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            self._same_ring(other)
            return other
        return Poly.constant(self.nvars, as_rat(other), self.params)

    def __add__(self, other) -> "Poly":
        return self._wrap(self.rep + self._coerce(other).rep)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return self._wrap(-self.rep)

    def __sub__(self, other) -> "Poly":
        return self._wrap(self.rep - self._coerce(other).rep)

    def __rsub__(self, other) -> "Poly":
        return self._wrap(self._coerce(other).rep - self.rep)

    def _truncated(self, rep: PolyElement, degree: int) -> PolyElement:
        return self.ring.from_dict({m: c for m, c in rep.items() if sum(m) <= degree})

    def mul(self, other, trunc: Optional[int] = None) -> "Poly":
        """Product, optionally dropping every term of total degree > trunc."""
        other = self._coerce(other)
        if trunc is None:
            return self._wrap(self.rep * other.rep)
        product = self._truncated(self.rep, trunc) * self._truncated(other.rep, trunc)
        return self._wrap(self._truncated(product, trunc))

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            return self._wrap(self.rep.mul_ground(_qq(other)))
        return self.mul(other)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "Poly":
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("polynomial exponents must be nonnegative integers")
        return self._wrap(self.rep ** exponent)

    def scale(self, factor: Number) -> "Poly":
        return self * as_rat(factor)

    def __eq__(self, other) -> bool:
        if isinstance(other, Poly):
            return (self.nvars == other.nvars and self.params == other.params
                    and self.rep == other.rep)
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.rep == Poly.constant(self.nvars, other, self.params).rep
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.nvars, self.params, frozenset(self.terms.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"Poly({self.format()})"

    def exact_div(self, other: "Poly") -> "Poly":
        """Exact quotient self / other; raises ValueError if other does not divide self."""
        other = self._coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        try:
            return self._wrap(self.rep.exquo(other.rep))
        except ExactQuotientFailed as exc:
            raise ValueError("polynomial division is not exact") from exc

    # ---------- Calculus and substitution ----------
    def partial(self, axis: int) -> "Poly":
        if not 0 <= axis < self.width:
            raise ArityError(f"axis {axis} out of range")
        return self._wrap(self.rep.diff(self.ring.gens[axis]))

    def evaluate(self, point: Sequence[Number]) -> Fraction:
        if len(point) != self.nvars:
            raise ArityError(f"point has {len(point)} coordinates, polynomial expects {self.nvars}")
        if self.uses_parameters():
            raise UninstantiatedParameterError(
                f"parameters {', '.join(self.params)} must be bound before evaluation")
        if not self.nvars or self.rep.is_ground:
            return self.constant_term()
        gens = self.ring.gens
        value = self.rep.evaluate([(gens[i], _qq(v)) for i, v in enumerate(point)])
        if isinstance(value, PolyElement):
            value = value.get(value.ring.zero_monom, QQ.zero)
        return _from_qq(value)

    def bind(self, bindings: Mapping[str, Number]) -> "Poly":
        """Substitute values for named parameters, dropping their slots."""
        gens = self.ring.gens
        pairs = [(gens[self.nvars + i], _qq(bindings[name]))
                 for i, name in enumerate(self.params) if name in bindings]
        keep = tuple(name for name in self.params if name not in bindings)
        keep_slots = [self.nvars + i for i, name in enumerate(self.params) if name not in bindings]
        bound = self.rep.subs(pairs) if pairs else self.rep
        terms = {m[:self.nvars] + tuple(m[s] for s in keep_slots): _from_qq(c)
                 for m, c in bound.items()}
        return Poly(self.nvars, terms, keep)

    def substitute(self, subs: Sequence["Poly"], trunc: Optional[int] = None) -> "Poly":
        """
        Compose: replace variable j by subs[j]. All subs share one target ring.
        With `trunc`, every intermediate product is truncated at that total degree.
        """
        if len(subs) != self.nvars:
            raise ArityError(f"need {self.nvars} substitutions, got {len(subs)}")
        if self.params:
            raise UninstantiatedParameterError("bind parameters before composing polynomials")
        if not subs:
            raise ArityError("cannot compose a polynomial in zero variables")
        target = subs[0]
        powers: Dict[Tuple[int, int], Poly] = {}

        def power_of(j: int, k: int) -> Poly:
            key = (j, k)
            if key not in powers:
                if k == 0:
                    powers[key] = Poly.one(target.nvars, target.params)
                else:
                    powers[key] = power_of(j, k - 1).mul(subs[j], trunc)
            return powers[key]

        result = Poly.zero(target.nvars, target.params)
        for exponent, coeff in self.terms.items():
            term = Poly.constant(target.nvars, coeff, target.params)
            for j, k in enumerate(exponent):
                if k:
                    term = term.mul(power_of(j, k), trunc)
            result = result + term
        return result

    def truncate(self, degree: int) -> "Poly":
        return self._wrap(self._truncated(self.rep, degree))

    def homogeneous_part(self, degree: int, axes: Optional[Sequence[int]] = None) -> "Poly":
        axes = range(self.width) if axes is None else axes
        return self._wrap(self.ring.from_dict(
            {m: c for m, c in self.rep.items() if sum(m[a] for a in axes) == degree}))

    def weighted_terms(self, weights: Sequence[int]) -> Dict[int, "Poly"]:
        """Split into weighted-homogeneous pieces keyed by weighted degree."""
        pieces: Dict[int, dict] = {}
        for monom, coeff in self.rep.items():
            degree = sum(w * e for w, e in zip(weights, monom))
            pieces.setdefault(degree, {})[monom] = coeff
        return {d: self._wrap(self.ring.from_dict(t)) for d, t in pieces.items()}

    # ---------- Printing ----------
    def format(self, names: Optional[Sequence[str]] = None) -> str:
        """Render in the manifest expression syntax (re-parseable)."""
        labels = list(names) if names is not None else [f"x{i + 1}" for i in range(self.nvars)]
        labels += list(self.params)
        if not self.rep:
            return "0"
        pieces: List[str] = []
        for exponent, coeff in self.sorted_terms():
            factors = []
            for label, power in zip(labels, exponent):
                if power == 1:
                    factors.append(label)
                elif power > 1:
                    factors.append(f"{label}^{power}")
            monomial = "*".join(factors)
            if not monomial:
                text = rat_str(coeff)
            elif coeff == 1:
                text = monomial
            elif coeff == -1:
                text = "-" + monomial
            else:
                text = f"{rat_str(coeff)}*{monomial}"
            if not pieces:
                pieces.append(text)
            elif text.startswith("-"):
                pieces.append(" - " + text[1:])
            else:
                pieces.append(" + " + text)
        return "".join(pieces)


# ---------- Rational linear algebra ----------

def rational_matrix(rows: Sequence[Sequence[Number]]) -> Matrix:
    return Matrix([[_sym(v) for v in row] for row in rows])


def rational_rank(rows: Sequence[Sequence[Number]]) -> int:
    if not rows or not rows[0]:
        return 0
    return rational_matrix(rows).rank()


def columns_rank(columns: Sequence[Sequence[Number]], dim: int) -> int:
    """Rank of the matrix whose columns are given."""
    if not columns:
        return 0
    return rational_rank([[col[i] for col in columns] for i in range(dim)])


def nullspace(rows: Sequence[Sequence[Number]], ncols: int) -> List[List[Fraction]]:
    """Basis of {v : A v = 0}, one vector per free column (set to 1), in column order."""
    if not rows:
        return [[Fraction(int(i == j)) for i in range(ncols)] for j in range(ncols)]
    return [[_from_sym(v) for v in vec] for vec in rational_matrix(rows).nullspace()]


def solve(rows: Sequence[Sequence[Number]], rhs: Sequence[Number]) -> Optional[List[Fraction]]:
    """One exact solution of A x = b (free variables set to 0), or None if inconsistent."""
    if not rows:
        return []
    ncols = len(rows[0])
    augmented = rational_matrix([list(row) + [b] for row, b in zip(rows, rhs)])
    rref, pivots = augmented.rref()
    if ncols in pivots:
        return None
    solution = [Fraction(0)] * ncols
    for r, pc in enumerate(pivots):
        solution[pc] = _from_sym(rref[r, ncols])
    return solution


def rational_det(rows: Sequence[Sequence[Number]]) -> Fraction:
    if any(len(row) != len(rows) for row in rows):
        raise ArityError("determinant of a non-square matrix")
    if not rows:
        return Fraction(1)
    return _from_sym(rational_matrix(rows).det(method="bareiss"))


def rational_inverse(rows: Sequence[Sequence[Number]]) -> List[List[Fraction]]:
    matrix = rational_matrix(rows)
    if matrix.det(method="bareiss") == 0:
        raise ZeroDivisionError("matrix is singular")
    inverse = matrix.inv()
    return [[_from_sym(inverse[i, j]) for j in range(inverse.cols)] for i in range(inverse.rows)]


# ---------- Polynomial matrices ----------

class PolyMatrix:
    """
    Rectangular matrix of Polys sharing one variable context, backed by a
    sympy DomainMatrix over the polynomial ring.

    Example:
        M = PolyMatrix.from_columns([X1, X2, X12])   # columns as Poly sequences
        M.det()                                       # x1 for the Martinet frame
        M.rank_at([0, 0, 0])                          # 2
    """

    def __init__(self, rows: Sequence[Sequence[Poly]], nvars: Optional[int] = None):
        self.entries: Tuple[Tuple[Poly, ...], ...] = tuple(tuple(r) for r in rows)
        self.rows = len(self.entries)
        self.cols = len(self.entries[0]) if self.entries else 0
        if any(len(r) != self.cols for r in self.entries):
            raise ArityError("matrix rows have different lengths")
        if self.entries and self.cols:
            ring = self.entries[0][0]
            for row in self.entries:
                for entry in row:
                    ring._same_ring(entry)
            self.nvars = ring.nvars
            self.params = ring.params
        else:
            self.nvars = nvars or 0
            self.params = ()

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[Poly]], nrows: Optional[int] = None,
                     nvars: Optional[int] = None) -> "PolyMatrix":
        if not columns:
            return cls([() for _ in range(nrows or 0)], nvars)
        nrows = len(columns[0])
        return cls([[col[i] for col in columns] for i in range(nrows)], nvars)

    def column(self, j: int) -> Tuple[Poly, ...]:
        return tuple(row[j] for row in self.entries)

    def _domain_matrix(self) -> DomainMatrix:
        ring = poly_ring(self.nvars, self.params)
        return DomainMatrix([[entry.rep for entry in row] for row in self.entries],
                            (self.rows, self.cols), ring.to_domain())

    def evaluate(self, point: Sequence[Number]) -> List[List[Fraction]]:
        return [[entry.evaluate(point) for entry in row] for row in self.entries]

    def rank_at(self, point: Sequence[Number]) -> int:
        if len(point) != self.nvars and self.cols:
            raise ArityError(f"point has {len(point)} coordinates, matrix expects {self.nvars}")
        if not self.cols or not self.rows:
            return 0
        return rational_rank(self.evaluate(point))

    def det(self) -> Poly:
        """Fraction-free determinant over the polynomial ring."""
        if self.rows != self.cols:
            raise ArityError(f"determinant of a non-square {self.rows}x{self.cols} matrix")
        if self.rows == 0:
            return Poly.one(self.nvars, self.params)
        return self.entries[0][0]._wrap(self._domain_matrix().det())

    def generic_rank(self) -> int:
        """Rank over the rational function field."""
        if not self.rows or not self.cols:
            return 0
        matrix = self._domain_matrix()
        return matrix.convert_to(matrix.domain.get_field()).rank()


class PolySpan:
    """Incremental Q-linear span of polynomials; add() reports whether the span grew."""

    def __init__(self):
        self.basis: List[Poly] = []

    def add(self, poly: Poly) -> bool:
        if poly.is_zero():
            return False
        candidates = self.basis + [poly]
        monomials = sorted({m for p in candidates for m in p.terms})
        rank = rational_rank([[p.terms.get(m, 0) for m in monomials] for p in candidates])
        if rank == len(self.basis):
            return False
        self.basis.append(poly)
        return True

    def __len__(self) -> int:
        return len(self.basis)


class VectorBasis:
    """Incremental basis of rational vectors; add() reports whether rank grew."""

    def __init__(self, dim: int):
        self.dim = dim
        self.members: List[List[Fraction]] = []

    def _check(self, vector: Sequence[Number]) -> List[Fraction]:
        if len(vector) != self.dim:
            raise ArityError(f"vector of length {len(vector)} in a {self.dim}-dimensional space")
        return [as_rat(x) for x in vector]

    def add(self, vector: Sequence[Number]) -> bool:
        vector = self._check(vector)
        if not any(vector) or self.contains(vector):
            return False
        self.members.append(vector)
        return True

    def contains(self, vector: Sequence[Number]) -> bool:
        vector = self._check(vector)
        if not self.members:
            return not any(vector)
        return rational_rank(self.members + [vector]) == len(self.members)

    @property
    def rank(self) -> int:
        return len(self.members)
