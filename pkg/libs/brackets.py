#   @file brackets.py
#   @brief Polynomial vector fields, Lie brackets, iterated brackets X_I and
#          iterated Lie derivatives along a frame.
#   @date 19-Oct-2026

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from libs.errors import ArityError, PreconditionError
from libs.exactalg import Number, Poly, as_rat

logger = logging.getLogger(__name__)

MultiIndex = Tuple[int, ...]


@dataclass(frozen=True)
class VecField:
    """Vector field sum_j components[j] * d/dx_j with polynomial coefficients."""
    components: Tuple[Poly, ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if not self.components:
            raise ArityError("a vector field needs at least one component")
        ring = self.components[0]
        for comp in self.components[1:]:
            ring._same_ring(comp)
        if ring.nvars != len(self.components):
            raise ArityError(f"{len(self.components)} components for a {ring.nvars}-dimensional space")

    @classmethod
    def zero(cls, n: int) -> "VecField":
        return cls(tuple(Poly.zero(n) for _ in range(n)))

    @classmethod
    def coordinate(cls, n: int, axis: int) -> "VecField":
        return cls(tuple(Poly.constant(n, int(j == axis)) for j in range(n)))

    @property
    def dim(self) -> int:
        return len(self.components)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def degree(self) -> int:
        return max(c.degree() for c in self.components)

    def apply(self, f: Poly) -> Poly:
        """Lie derivative X f = sum_j X^j d_j f."""
        if f.nvars != self.dim:
            raise ArityError("function and field live in different dimensions")
        total = Poly.zero(f.nvars, f.params)
        for j, comp in enumerate(self.components):
            if comp.is_zero():
                continue
            d = f.partial(j)
            if not d.is_zero():
                total = total + comp * d
        return total

    def evaluate(self, point: Sequence[Number]) -> List[Fraction]:
        return [c.evaluate(point) for c in self.components]

    def __add__(self, other: "VecField") -> "VecField":
        _check_dims(self, other)
        return VecField(tuple(a + b for a, b in zip(self.components, other.components)))

    def __sub__(self, other: "VecField") -> "VecField":
        _check_dims(self, other)
        return VecField(tuple(a - b for a, b in zip(self.components, other.components)))

    def __neg__(self) -> "VecField":
        return VecField(tuple(-c for c in self.components))

    def scale(self, factor) -> "VecField":
        return VecField(tuple(c * factor for c in self.components))

    def bind(self, bindings: Mapping[str, Number]) -> "VecField":
        return VecField(tuple(c.bind(bindings) for c in self.components))

    def format(self, names: Optional[Sequence[str]] = None) -> str:
        parts = []
        for j, comp in enumerate(self.components):
            if comp.is_zero():
                continue
            text = comp.format(names)
            if len(comp.terms) > 1:
                text = f"({text})"
            parts.append(f"{text}*d{j + 1}")
        return " + ".join(parts) if parts else "0"


def _check_dims(x: VecField, y: VecField) -> None:
    if x.dim != y.dim:
        raise ArityError(f"vector fields of dimensions {x.dim} and {y.dim}")


def lie_bracket(x: VecField, y: VecField) -> VecField:
    """[X, Y]^j = sum_i X^i d_i Y^j - Y^i d_i X^j."""
    _check_dims(x, y)
    return VecField(tuple(x.apply(yj) - y.apply(xj) for xj, yj in zip(x.components, y.components)))


@dataclass(frozen=True)
class Frame:
    """Ordered orthonormal frame X_1..X_m of a rank-m distribution on R^n (m < n)."""
    fields: Tuple[VecField, ...]
    _cache: Dict[MultiIndex, VecField] = field(default_factory=dict, compare=False,
                                               hash=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "fields", tuple(self.fields))
        if not self.fields:
            raise PreconditionError("a frame needs at least one field")
        n = self.fields[0].dim
        for f in self.fields:
            _check_dims(self.fields[0], f)
        if len(self.fields) >= n:
            raise PreconditionError(f"rank must be < dimension (rank {len(self.fields)}, dimension {n})")
        for i, f in enumerate(self.fields, 1):
            if f.is_zero():
                raise PreconditionError(f"field X{i} is identically zero")

    @property
    def dim(self) -> int:
        return self.fields[0].dim

    @property
    def rank(self) -> int:
        return len(self.fields)

    def __getitem__(self, index: int) -> VecField:
        """1-based access, X_1 = frame[1]."""
        if not 1 <= index <= self.rank:
            raise IndexError(f"field index {index} outside 1..{self.rank}")
        return self.fields[index - 1]

    def recombine(self, matrix: Sequence[Sequence[Number]]) -> "Frame":
        """X'_i = sum_j c_ij X_j."""
        new_fields = []
        for row in matrix:
            acc = VecField.zero(self.dim)
            for c, f in zip(row, self.fields):
                if as_rat(c) != 0:
                    acc = acc + f.scale(as_rat(c))
            new_fields.append(acc)
        return Frame(tuple(new_fields))


@dataclass(frozen=True)
class BracketFamily:
    """n multiindices whose brackets are evaluated together (a candidate basis)."""
    indices: Tuple[MultiIndex, ...]

    @property
    def total_length(self) -> int:
        return sum(len(i) for i in self.indices)

    def __len__(self) -> int:
        return len(self.indices)

    def label(self) -> str:
        return "(" + ", ".join(format_index(i) for i in self.indices) + ")"


@dataclass(frozen=True)
class BracketEntry:
    index: MultiIndex
    field: VecField

    @property
    def is_zero(self) -> bool:
        return self.field.is_zero()


def format_index(index: MultiIndex) -> str:
    return "X" + "".join(str(i) for i in index) if max(index) < 10 else "X(" + ",".join(map(str, index)) + ")"


def bracket_of(index: Sequence[int], frame: Frame) -> VecField:
    """Right-nested bracket X_I = [X_i1, [X_i2, ..., X_ij]...]; X_(i) = X_i."""
    index = tuple(index)
    if not index:
        raise ArityError("multiindex must be nonempty")
    for i in index:
        if not 1 <= i <= frame.rank:
            raise IndexError(f"multiindex entry {i} outside 1..{frame.rank}")
    cached = frame._cache.get(index)
    if cached is not None:
        return cached
    if len(index) == 1:
        result = frame[index[0]]
    else:
        result = lie_bracket(frame[index[0]], bracket_of(index[1:], frame))
    frame._cache[index] = result
    return result


def lie_derivative_word(word: Sequence[int], f: Poly, frame: Frame) -> Poly:
    """(X_i1 X_i2 ... X_ij f): the rightmost derivation acts first."""
    result = f
    for i in reversed(tuple(word)):
        result = frame[i].apply(result)
    return result


def enumerate_brackets(frame: Frame, max_len: int, keep_zero: bool = True) -> List[BracketEntry]:
    """
    All multiindices of length <= max_len with their brackets, ordered by length
    then lexicographically. Zero brackets are kept (and flagged) unless
    keep_zero=False; extensions of a zero bracket are zero and are produced
    without recomputation.
    """
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    zero = VecField.zero(frame.dim)
    entries: List[BracketEntry] = []
    level = [((i,), frame[i]) for i in range(1, frame.rank + 1)]
    for length in range(1, max_len + 1):
        for index, vec in level:
            frame._cache.setdefault(index, vec)
            if keep_zero or not vec.is_zero():
                entries.append(BracketEntry(index, vec))
        if length == max_len:
            break
        next_level = []
        for i in range(1, frame.rank + 1):
            for index, vec in level:
                new_index = (i,) + index
                if vec.is_zero():
                    next_level.append((new_index, zero))
                else:
                    next_level.append((new_index, bracket_of(new_index, frame)))
        next_level.sort(key=lambda item: item[0])
        level = next_level
    logger.debug("enumerated %d brackets up to length %d", len(entries), max_len)
    return entries


def nonzero_brackets(frame: Frame, max_len: int) -> List[BracketEntry]:
    """Brackets of length <= max_len that are not identically zero."""
    # zero brackets are never extended
    entries: List[BracketEntry] = []
    level = [((i,), frame[i]) for i in range(1, frame.rank + 1)]
    for length in range(1, max_len + 1):
        level = [(idx, vec) for idx, vec in level if not vec.is_zero()]
        level.sort(key=lambda item: item[0])
        entries.extend(BracketEntry(idx, vec) for idx, vec in level)
        if length == max_len or not level:
            break
        level = [((i,) + idx, bracket_of((i,) + idx, frame))
                 for i in range(1, frame.rank + 1) for idx, vec in level]
    return entries


def iter_bracket_levels(frame: Frame):
    """Yield, for length 1, 2, ..., the nonzero brackets of exactly that length."""
    level = [BracketEntry((i,), frame[i]) for i in range(1, frame.rank + 1)]
    level = [e for e in level if not e.is_zero]
    while level:
        yield level
        nxt = [BracketEntry((i,) + e.index, bracket_of((i,) + e.index, frame))
               for i in range(1, frame.rank + 1) for e in level]
        level = sorted((e for e in nxt if not e.is_zero), key=lambda e: e.index)
