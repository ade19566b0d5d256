"""Lie brackets, iterated brackets and Lie derivatives along a frame."""

import random
from fractions import Fraction

import pytest

from libs.brackets import (BracketFamily, Frame, VecField, bracket_of, enumerate_brackets,
                           format_index, lie_bracket, lie_derivative_word, nonzero_brackets)
from libs.errors import PreconditionError
from libs.exactalg import Poly


def random_field(rng, n):
    comps = []
    for _ in range(n):
        terms = {}
        for _ in range(rng.randint(0, 3)):
            exponent = [0] * n
            for _ in range(rng.randint(0, 2)):
                exponent[rng.randrange(n)] += 1
            terms[tuple(exponent)] = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
        comps.append(Poly(n, terms))
    return VecField(tuple(comps))


def test_martinet_brackets(martinet):
    frame = martinet.frame
    x1 = Poly.variable(3, 0)
    assert bracket_of((1, 2), frame) == VecField((Poly.zero(3), Poly.zero(3), x1))
    assert bracket_of((1, 1, 2), frame) == VecField.coordinate(3, 2)
    assert bracket_of((2, 1, 2), frame).is_zero()
    assert bracket_of((1, 2, 1), frame) == -VecField.coordinate(3, 2)


def test_antisymmetry_and_jacobi_on_random_fields():
    rng = random.Random(11)
    for trial in range(100):
        n = rng.randint(2, 4)
        x, y, z = (random_field(rng, n) for _ in range(3))
        assert (lie_bracket(x, y) + lie_bracket(y, x)).is_zero(), trial
        jacobi = (lie_bracket(x, lie_bracket(y, z)) + lie_bracket(y, lie_bracket(z, x))
                  + lie_bracket(z, lie_bracket(x, y)))
        assert jacobi.is_zero(), trial


def test_bracket_acts_as_commutator(make_frame):
    frame = make_frame([["1", "x3", "0"], ["0", "x1^2", "1 + x2"]])
    f = Poly(3, {(1, 2, 0): 1, (0, 1, 3): Fraction(2, 3), (0, 0, 1): 5})
    commutator = lie_derivative_word((1, 2), f, frame) - lie_derivative_word((2, 1), f, frame)
    assert commutator == bracket_of((1, 2), frame).apply(f)


def test_lie_derivative_word_rightmost_first(martinet):
    x3 = Poly.variable(3, 2)
    # X1 X1 X2 x3 = d1 d1 (x1^2 / 2) = 1
    assert lie_derivative_word((1, 1, 2), x3, martinet.frame) == Poly.one(3)
    assert lie_derivative_word((2, 1, 1), x3, martinet.frame).is_zero()


def test_nonzero_brackets_prune_zero_branches(martinet):
    entries = nonzero_brackets(martinet.frame, 3)
    by_length = {}
    for entry in entries:
        by_length.setdefault(len(entry.index), set()).add(entry.index)
    assert by_length[1] == {(1,), (2,)}
    assert by_length[2] == {(1, 2), (2, 1)}
    assert by_length[3] == {(1, 1, 2), (1, 2, 1)}


def test_enumerate_brackets_keeps_zero_entries(martinet):
    entries = enumerate_brackets(martinet.frame, 2)
    assert [e.index for e in entries] == [(1,), (2,), (1, 1), (1, 2), (2, 1), (2, 2)]
    assert [e.is_zero for e in entries] == [False, False, True, False, False, True]
    assert len(enumerate_brackets(martinet.frame, 2, keep_zero=False)) == 4


def test_frame_rank_must_be_below_dimension(make_frame):
    with pytest.raises(PreconditionError, match="rank must be < dimension"):
        make_frame([["1", "0"], ["0", "1"]])
    with pytest.raises(PreconditionError):
        make_frame([["0", "0", "0"]])


def test_frame_recombination(martinet):
    rotated = martinet.frame.recombine([[0, 1], [1, 0]])
    assert rotated[1] == martinet.frame[2]
    assert rotated[2] == martinet.frame[1]
    with pytest.raises(IndexError):
        martinet.frame[3]


def test_labels():
    assert format_index((1, 1, 2)) == "X112"
    assert BracketFamily(((1,), (2,), (1, 1, 2))).label() == "(X1, X2, X112)"
    assert BracketFamily(((1,), (1, 2))).total_length == 3
