"""Privileged charts, nilpotent approximation and the induced hat data."""

from fractions import Fraction

import pytest

from libs.brackets import VecField, enumerate_brackets
from libs.errors import PreconditionError
from libs.exactalg import Poly
from libs.flags import growth_vector
from libs.nilpotent import (build_chart, hat_form, invert_series, nilpotentize,
                            weighted_field_degrees)
from libs.orders import nonholonomic_order


def z(j):
    return Poly.variable(3, j)


def test_martinet_chart_at_origin(martinet):
    chart = build_chart(martinet.frame, [0, 0, 0])
    assert chart.weights == (1, 1, 3)
    assert chart.Q == 5
    assert chart.tangential == 3
    assert chart.param_map == (z(0), z(1), z(2) + z(0) ** 2 * z(1) * Fraction(1, 6))
    assert chart.coords[2] == z(2) - z(0) ** 2 * z(1) * Fraction(1, 6)


def test_chart_coordinates_are_privileged(martinet, double_martinet):
    for manifest, point in [(martinet, [0, 0, 0]), (martinet, [1, 0, 0]),
                            (double_martinet, [0, 0, 0, 0])]:
        chart = build_chart(manifest.frame, point)
        assert chart.Q == growth_vector(manifest.frame, point).Q
        for coord, weight in zip(chart.coords, chart.weights):
            assert nonholonomic_order(coord, manifest.frame, chart.center, weight + 1) == weight


def test_martinet_nilpotent_approximation(martinet):
    chart = build_chart(martinet.frame, [0, 0, 0])
    nil = nilpotentize(martinet.frame, chart)
    assert nil.fields[0] == VecField((Poly.one(3), Poly.zero(3), -(z(0) * z(1)) * Fraction(1, 3)))
    assert nil.fields[1] == VecField((Poly.zero(3), Poly.one(3), z(0) ** 2 * Fraction(1, 3)))
    assert nil.is_homogeneous()
    for field in nil.fields:
        assert weighted_field_degrees(field, chart.weights) == {-1}


def test_nilpotent_frame_keeps_the_growth_vector(martinet, double_martinet):
    for manifest, origin in [(martinet, [0, 0, 0]), (double_martinet, [0, 0, 0, 0])]:
        chart = build_chart(manifest.frame, origin)
        nil = nilpotentize(manifest.frame, chart)
        assert growth_vector(nil.frame, origin).dims == growth_vector(manifest.frame, origin).dims


def test_nilpotent_frame_has_no_brackets_past_the_step(martinet):
    chart = build_chart(martinet.frame, [0, 0, 0])
    nil = nilpotentize(martinet.frame, chart)
    longest = [e for e in enumerate_brackets(nil.frame, 4) if len(e.index) == 4]
    assert longest
    assert all(e.is_zero for e in longest)


def test_truncation_below_the_step(martinet):
    with pytest.raises(PreconditionError, match="below the step"):
        build_chart(martinet.frame, [0, 0, 0], trunc=2)


def test_plane_adapted_chart(martinet):
    plane = martinet.submanifold("N")
    chart = build_chart(martinet.frame, [0, 0, 0], submanifold=plane)
    assert chart.weights == (1, 3, 1)
    assert chart.tangential == 2
    assert chart.submanifold == "N"
    assert chart.param_map == (z(2), z(0), z(1))
    assert chart.fields[0].label() == "X2"
    assert [f.tangential for f in chart.fields] == [True, True, False]

    nil = nilpotentize(martinet.frame, chart)
    assert nil.fields[0] == VecField.coordinate(3, 2)
    assert nil.fields[1] == VecField((Poly.one(3), z(2) ** 2 * Fraction(1, 2), Poly.zero(3)))

    hat = hat_form(chart, nil, plane)
    assert hat.scalar == 1
    assert hat.fields[0] == nil.fields[1]
    assert hat.fields[1] == VecField.coordinate(3, 1)
    assert hat.labels[0] == "X2"


def test_hat_form_needs_the_submanifold(martinet):
    plane = martinet.submanifold("N")
    chart = build_chart(martinet.frame, [0, 0, 0], submanifold=plane)
    nil = nilpotentize(martinet.frame, chart)
    with pytest.raises(PreconditionError):
        hat_form(chart, nil)


def test_full_chart_hat_form_uses_the_volume(martinet):
    chart = build_chart(martinet.frame, [0, 0, 0])
    nil = nilpotentize(martinet.frame, chart)
    hat = hat_form(chart, nil, volume=martinet.volume)
    assert hat.scalar == 1
    assert len(hat.fields) == 3


def test_chart_off_the_submanifold(martinet):
    with pytest.raises(PreconditionError, match="not on submanifold"):
        build_chart(martinet.frame, [1, 0, 0], submanifold=martinet.submanifold("N"))


def test_series_inversion():
    u, v = Poly.variable(2, 0), Poly.variable(2, 1)
    forward = [u + 1, v + u * u]
    inverse = invert_series(forward, [Fraction(1), Fraction(0)], 4)
    # y = (u + 1, v + u^2) inverts to u = y1 - 1, v = y2 - (y1 - 1)^2
    assert inverse[0] == u - 1
    assert inverse[1] == v - (u - 1) ** 2
