"""Nonholonomic orders, bracket families, sigma bounds and nu."""

from fractions import Fraction

import pytest

from libs.brackets import BracketFamily
from libs.errors import EnumerationOverflow, NotRegularError, PreconditionError
from libs.exactalg import Poly
from libs.flags import SubmanifoldSpec, growth_vector
from libs.orders import (AboveCap, VolumeForm, default_bracket_len, enumerate_families,
                         family_volume, generic_order_along, nonholonomic_order, nu_at,
                         nu_on_submanifold, nu_polynomials, sigma_bounds)


def test_nonholonomic_order_of_coordinates(martinet):
    frame = martinet.frame
    x1, x2, x3 = (Poly.variable(3, j) for j in range(3))
    origin = [0, 0, 0]
    assert nonholonomic_order(x1, frame, origin, 5) == 1
    assert nonholonomic_order(x3, frame, origin, 5) == 3
    assert nonholonomic_order(x3, frame, [1, 0, 0], 5) == 1
    assert nonholonomic_order(Poly.one(3), frame, origin, 5) == 0
    assert nonholonomic_order(x3, frame, origin, 2) == AboveCap(2)
    assert str(AboveCap(2)) == ">2"
    assert nonholonomic_order(x2 * x2, frame, origin, 5) == 2
    with pytest.raises(ValueError):
        nonholonomic_order(x1, frame, origin, -1)


def test_order_of_zero_function_is_above_any_cap(martinet):
    assert nonholonomic_order(Poly.zero(3), martinet.frame, [0, 0, 0], 4) == AboveCap(4)


def test_generic_order_along_plane(martinet):
    x1 = Poly.variable(3, 0)
    plane = martinet.submanifold("N")
    assert generic_order_along(x1 ** 2, martinet.frame, plane, 6) == 2
    assert generic_order_along(Poly.variable(3, 1), martinet.frame, plane, 6) == 0


def test_volume_form():
    x1 = Poly.variable(2, 0)
    assert VolumeForm.canonical(2).at([5, 7]) == 1
    assert VolumeForm(x1 + 2).at([1, 0]) == 3
    with pytest.raises(PreconditionError):
        VolumeForm(Poly.zero(2))


def test_martinet_families(martinet):
    families = enumerate_families(martinet.frame, 4, 2)
    assert len(families) == 1
    family, det = families[0]
    assert family.total_length == 4
    assert det in (Poly.variable(3, 0), -Poly.variable(3, 0))
    volume = family_volume(family, martinet.frame, martinet.volume)
    assert volume == det
    with pytest.raises(PreconditionError):
        family_volume(BracketFamily(((1,), (2,))), martinet.frame, martinet.volume)


def test_family_budget(single_stratum_k3):
    with pytest.raises(EnumerationOverflow):
        enumerate_families(single_stratum_k3.frame, 8, 3, budget=1)


def test_default_bracket_len():
    assert default_bracket_len(3, 4, 3) == 2
    assert default_bracket_len(2, 3, 3) == 1
    assert default_bracket_len(5, 20, 3) == 5


def test_martinet_sigma(martinet):
    result = sigma_bounds(martinet.frame, martinet.volume, martinet.submanifold("N"), 4)
    assert result.sigma_minus == 1
    assert result.sigma_plus == 1
    assert result.sigma == 1
    assert result.defined
    assert result.bracket_len == 2
    assert [w.label() for w in result.witnesses] == ["(X1, X2, X12)"]


def test_double_martinet_sigma(double_martinet):
    result = sigma_bounds(double_martinet.frame, double_martinet.volume,
                          double_martinet.submanifold("L"), 5)
    assert result.sigma == 1


def test_single_stratum_sigma(single_stratum):
    k, manifest = single_stratum
    result = sigma_bounds(manifest.frame, manifest.volume, manifest.submanifold("N"), 7)
    assert result.sigma == k - 1


def test_corank_two_sigma(corank_two):
    k, manifest = corank_two
    result = sigma_bounds(manifest.frame, manifest.volume, manifest.submanifold("S"), 7)
    assert result.sigma_minus == k - 1
    assert result.sigma == k - 1


def test_sigma_minus_dominates_the_dimension_gap(martinet, double_martinet, single_stratum_k3):
    cases = [(martinet, "N", [0, 0, 0], 4), (double_martinet, "L", [0, 0, 0, 0], 5),
             (single_stratum_k3, "N", [0, 0, 0, 0, 0], 7)]
    for manifest, name, point, q_reg in cases:
        result = sigma_bounds(manifest.frame, manifest.volume, manifest.submanifold(name), q_reg)
        assert result.sigma_minus >= growth_vector(manifest.frame, point).Q - q_reg


def test_sigma_order_cap(martinet):
    result = sigma_bounds(martinet.frame, martinet.volume, martinet.submanifold("N"), 4, order_cap=0)
    assert result.sigma_minus == AboveCap(0)
    assert result.sigma is None


def test_nu_martinet(martinet):
    nu = nu_at(martinet.frame, martinet.volume, [Fraction(1, 2), 3, 0], 4)
    assert nu.value == Fraction(1, 2)
    assert [f.label() for f in nu.argmax] == ["(X1, X2, X12)"]
    with pytest.raises(NotRegularError):
        nu_at(martinet.frame, martinet.volume, [0, 1, 0], 4)


def test_nu_double_martinet_is_the_max_of_two_minors(double_martinet):
    nu = nu_at(double_martinet.frame, double_martinet.volume, [Fraction(1, 3), Fraction(1, 2), 0, 0], 5)
    assert nu.value == Fraction(1, 2)
    nu = nu_at(double_martinet.frame, double_martinet.volume, [Fraction(-2, 3), Fraction(1, 2), 0, 0], 5)
    assert nu.value == Fraction(2, 3)


def test_nu_polynomials_single_stratum(single_stratum_k3):
    polys = nu_polynomials(single_stratum_k3.frame, single_stratum_k3.volume, 7)
    assert len(polys) == 1
    x1 = Poly.variable(5, 0)
    assert polys[0][1] in (x1 * x1 * 3, -(x1 * x1 * 3))


def test_nu_on_submanifold(martinet):
    plane = SubmanifoldSpec.coordinate_subspace("P", 3, [2])
    nu = nu_on_submanifold(martinet.frame, martinet.volume, plane, [Fraction(1, 2), 0], q_ref=4)
    # det[X1, X2, X12] = 1/2; completing d1, d2 with X2 gives 1/8, with X12 gives 1/2
    assert nu.value == 4
    assert [f.label() for f in nu.argmax] == ["(X1, X2, X12)"]
    assert nu.point == (Fraction(1, 2), 0, 0)
