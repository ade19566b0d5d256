"""Growth vectors, restricted flags, equiregularity and the singular-locus helpers."""

from fractions import Fraction

import pytest

from libs.brackets import bracket_of
from libs.errors import NotBracketGeneratingWithinCap, PreconditionError
from libs.exactalg import Poly, columns_rank
from libs.flags import (GenericColumnBasis, PointClass, SubmanifoldSpec, _probe_point, adapted_family,
                        classify_point, generic_growth, generic_restricted_profile, growth_vector,
                        rank_drop_minors, restricted_profile, sample_grid, singular_locus_check,
                        strong_equireg_check, weighted_dimension, weighted_dimension_from_codims)


def test_weighted_dimension():
    assert weighted_dimension((2, 3)) == 4
    assert weighted_dimension((2, 2, 3)) == 5
    assert weighted_dimension((3, 3, 4)) == 6


def test_martinet_growth(martinet):
    frame = martinet.frame
    regular = growth_vector(frame, [1, 0, 0])
    assert regular.dims == (2, 3)
    assert regular.Q == 4
    singular = growth_vector(frame, [0, 5, -2])
    assert singular.dims == (2, 2, 3)
    assert singular.Q == 5
    assert singular.increments == (2, 0, 1)
    assert generic_growth(frame).dims == (2, 3)
    assert classify_point(frame, [0, 0, 0]) is PointClass.SINGULAR
    assert classify_point(frame, [Fraction(1, 3), 0, 0]) is PointClass.REGULAR


def test_step_cap_is_enforced(martinet):
    with pytest.raises(NotBracketGeneratingWithinCap):
        growth_vector(martinet.frame, [0, 0, 0], cap=2)
    with pytest.raises(NotBracketGeneratingWithinCap):
        generic_growth(martinet.frame, cap=1)


def test_non_generating_frame(make_frame):
    frame = make_frame([["1", "0", "0"], ["0", "1", "0"]])
    with pytest.raises(NotBracketGeneratingWithinCap):
        growth_vector(frame, [0, 0, 0])


def test_generic_basis_rejects_dependent_column_after_vanishing_one():
    # (x1 - p0, 0) vanishes at the off-grid point but is generically nonzero
    p0 = _probe_point(2)[0]
    x1 = Poly.variable(2, 0)
    zero, one = Poly.zero(2), Poly.one(2)
    basis = GenericColumnBasis(2, 2)
    assert basis.add((x1 - p0, zero))
    assert not basis.add((one, zero))
    assert basis.rank == 1
    assert basis.add((zero, one))
    assert basis.rank == 2


def test_generic_growth_with_a_coefficient_vanishing_off_grid(make_frame):
    # X1 = d1, X2 = (x1 - p0) d2: generic rank 2 at every bracket length
    p0 = _probe_point(3)[0]
    frame = make_frame([["1", "0", "0"],
                        ["0", f"x1 - {p0.numerator}/{p0.denominator}", "0"]])
    with pytest.raises(NotBracketGeneratingWithinCap):
        generic_growth(frame, cap=3)


def test_adapted_family_has_full_rank(martinet, double_martinet, single_stratum_k3):
    cases = [(martinet, [0, 0, 0]), (martinet, [1, 0, 0]), (double_martinet, [0, 0, 0, 0]),
             (double_martinet, [1, 1, 0, 0]), (single_stratum_k3, [0, 0, 0, 0, 0])]
    for manifest, point in cases:
        frame = manifest.frame
        family = adapted_family(frame, point)
        assert len(family) == frame.dim
        assert family.total_length == growth_vector(frame, point).Q
        columns = [bracket_of(index, frame).evaluate(point) for index in family.indices]
        assert columns_rank(columns, frame.dim) == frame.dim


def test_martinet_restricted_flag(martinet):
    plane = martinet.submanifold("N")
    profile = restricted_profile(martinet.frame, plane, [0, 0])
    assert profile.dims == (2, 2, 3)
    assert profile.dims_n == (1, 1, 2)
    assert profile.Q == 5
    assert profile.Q_N == 4
    assert profile.r_not_n == 1
    assert weighted_dimension_from_codims(profile.dims_n, plane.dim) == profile.Q_N


def test_double_martinet_restricted_flag(double_martinet):
    line = double_martinet.submanifold("L")
    profile = restricted_profile(double_martinet.frame, line, [0, 0])
    assert generic_growth(double_martinet.frame).Q == 5
    assert profile.Q == 6
    assert profile.Q_N == 4
    assert profile.r_not_n == 1
    assert weighted_dimension_from_codims(profile.dims_n, line.dim) == 4


def test_single_stratum_restricted_flag(single_stratum):
    k, manifest = single_stratum
    profile = restricted_profile(manifest.frame, manifest.submanifold("N"), [0, 0, 0, 0])
    assert generic_growth(manifest.frame).Q == 7
    assert (profile.Q, profile.Q_N, profile.r_not_n) == (8, 7, 1)


def test_corank_two_restricted_flag(corank_two):
    k, manifest = corank_two
    stratum = manifest.submanifold("S")
    profile = restricted_profile(manifest.frame, stratum, [0, 0, 0])
    assert generic_growth(manifest.frame).Q == 7
    assert (profile.Q, profile.Q_N, profile.r_not_n) == (8, 6, 1)
    assert weighted_dimension_from_codims(profile.dims_n, stratum.dim) == 6


def test_strong_equiregularity(martinet, double_martinet):
    plane = martinet.submanifold("N")
    report = strong_equireg_check(martinet.frame, plane, sample_grid(2, 8))
    assert report.holds_on_samples
    assert report.generic_confirmed
    assert report.equiregular
    assert report.Q_N_bar == 4
    line = double_martinet.submanifold("L")
    assert strong_equireg_check(double_martinet.frame, line, sample_grid(2, 8)).Q_N_bar == 4


def test_equiregularity_fails_on_a_transversal_curve(martinet):
    # the x1-axis crosses the singular plane, so n_i jumps along it
    axis = SubmanifoldSpec.coordinate_subspace("A", 3, [1, 2])
    report = strong_equireg_check(martinet.frame, axis, [[0], [1], [Fraction(1, 2)]])
    assert not report.holds_on_samples
    assert not report.generic_confirmed
    assert not report.equiregular
    assert report.witnesses


def test_samples_off_the_jump_are_not_generically_confirmed(martinet):
    # every sample avoids x1 = 0, but the layer-2 rank still drops there
    axis = SubmanifoldSpec.coordinate_subspace("A", 3, [1, 2])
    report = strong_equireg_check(martinet.frame, axis, [[1], [2]])
    assert report.holds_on_samples
    assert not report.generic_confirmed
    flag = generic_restricted_profile(martinet.frame, axis)
    assert (flag.dims, flag.dims_n) == ((2, 3), (1, 1))
    assert not flag.constant_on_n
    assert generic_restricted_profile(martinet.frame, martinet.submanifold("N")).constant_on_n


def test_sample_grid_is_deterministic_and_centered():
    grid = sample_grid(2, 5, box=Fraction(1, 2), center=[1, 1])
    assert grid == sample_grid(2, 5, box=Fraction(1, 2), center=[1, 1])
    assert len(grid) == 5
    assert all(Fraction(1, 2) <= c <= Fraction(3, 2) for point in grid for c in point)


def test_coordinate_subspace_membership():
    plane = SubmanifoldSpec.coordinate_subspace("N", 3, [0])
    assert plane.dim == 2
    assert plane.params_of([0, 2, 3]) == (2, 3)
    assert plane.params_of([1, 2, 3]) is None
    assert plane.point_at([2, 3]) == (0, 2, 3)


def test_parametrized_submanifold():
    t = Poly.variable(1, 0)
    line = SubmanifoldSpec("D", 3, (t, t * 2, Poly.zero(1)), ("t",))
    assert line.contains([1, 2, 0])
    assert not line.contains([1, 1, 0])
    curve = SubmanifoldSpec("C", 3, (t, t * t, Poly.zero(1)), ("t",))
    with pytest.raises(PreconditionError):
        curve.params_of([1, 1, 0])


def test_rank_drop_minors_cut_out_the_singular_plane(martinet):
    x1 = Poly.variable(3, 0)
    minors = rank_drop_minors(martinet.frame, 2)
    assert len(minors) == 1
    assert minors[0] in (x1, -x1)


def test_singular_locus_surrogate(martinet):
    report = singular_locus_check(martinet.frame, martinet.submanifold("N"), [0, 0, 0])
    assert report.holds
    assert report.checked > 0
    with pytest.raises(PreconditionError):
        singular_locus_check(martinet.frame, martinet.submanifold("N"), [1, 0, 0])
