from fractions import Fraction

import pytest

from equivariant_morse import localization, rarita_schwinger
from equivariant_morse.algebra import GradedLaurentPoly, make_exponent
from equivariant_morse.charfrac import Chamber, CharFraction, frac_equals
from equivariant_morse.localization import FixedPoint, FixedPointProblem
from equivariant_morse.problem_io import parse_problem


def lam(*coords: int | str) -> tuple[Fraction, ...]:
    return make_exponent(coords)


def cp2() -> FixedPointProblem:
    return FixedPointProblem(
        rank=2, dim=2, chamber=Chamber.of([1, 2]),
        fixed_points=(FixedPoint(name="[1:0:0]", weights=(lam(1, 0), lam(0, 1))),
                      FixedPoint(name="[0:1:0]", weights=(lam(-1, 0), lam(-1, 1))),
                      FixedPoint(name="[0:0:1]", weights=(lam(0, -1), lam(1, -1)))),
    )


@pytest.fixture
def sphere() -> FixedPointProblem:
    return parse_problem("sphere_k_rs.json").problem


def test_spin_contribution(sphere: FixedPointProblem) -> None:
    """Test the square root of the canonical bundle at both poles."""
    south, north = sphere.fixed_points
    half_over = CharFraction(GradedLaurentPoly.monomial(lam("1/2")), [lam(1)])
    assert rarita_schwinger.spin_contribution(south, sphere.chamber, 1) == [(0, half_over)]
    assert rarita_schwinger.spin_contribution(north, sphere.chamber, 1) == [(1, half_over)]
    assert rarita_schwinger.half_weight_sum(north, 1) == lam("-1/2")
    assert not rarita_schwinger.spin_index(sphere)


def test_rs_contribution(sphere: FixedPointProblem) -> None:
    """Test the consolidated k-Rarita-Schwinger contribution."""
    south = sphere.fixed_points[0]
    assert rarita_schwinger.rs_trace(south, 2, 1) == (GradedLaurentPoly.constant(1, 2)
                                                      + GradedLaurentPoly.monomial(lam(1))
                                                      + GradedLaurentPoly.monomial(lam(-1)))
    # (λ^{3/2} + λ^{-1/2} + k λ^{1/2}) / (1 - λ)
    terms = rarita_schwinger.rs_contribution(south, 3, sphere.chamber, 1)
    numerator = (GradedLaurentPoly.monomial(lam("3/2")) + GradedLaurentPoly.monomial(lam("-1/2"))
                 + GradedLaurentPoly.monomial(lam("1/2"), 3))
    assert terms == [(0, CharFraction(numerator, [lam(1)]))]


@pytest.mark.parametrize("k", [-1, 0, 1, 2])
def test_forms_agree(k: int) -> None:
    """Test the consolidated and split forms of the contribution are equal."""
    chamber = Chamber.of([1, 2])
    for point in cp2().fixed_points + (FixedPoint(name="a1", weights=(lam(-4, 0), lam(-1, 1))),):
        consolidated = rarita_schwinger.rs_contribution(point, k, chamber, 2)
        split = rarita_schwinger.rs_split_form(point, k, chamber, 2)
        assert rarita_schwinger.forms_agree(consolidated, split)

    one = CharFraction.one(1)
    assert not rarita_schwinger.forms_agree([(0, one)], [(1, one)])
    assert not rarita_schwinger.forms_agree([(0, one)], [(0, -one)])


def test_sphere_rs_classical(sphere: FixedPointProblem) -> None:
    """Test the classical Morse polynomial of the Rarita-Schwinger operator on the sphere."""
    report = localization.classical_morse(rarita_schwinger.rs_problem(sphere, 0), Fraction(10))
    halves = GradedLaurentPoly.monomial(lam("-1/2")) + GradedLaurentPoly.monomial(lam("1/2"))
    assert report.polynomial == halves + halves.shift(lam(0), deg_b=1)
    assert report.stable
    assert not report.lacunary.equals_poincare

    # k = -1 is the spin Dirac operator, which has no kernel
    assert localization.check_vanishing(rarita_schwinger.rs_problem(sphere, -1), Fraction(10))
    assert localization.check_vanishing(rarita_schwinger.spin_problem(sphere), Fraction(10))

    for k in (-1, 0, 3):
        assert not rarita_schwinger.rs_index(sphere, k)


def test_rs_problem_is_self_dual(sphere: FixedPointProblem) -> None:
    """Test the twisted problems carry zero canonical traces and satisfy Serre duality."""
    problem = rarita_schwinger.rs_problem(cp2(), 1)
    assert problem.root_order == 2
    assert all(fp.canonical_trace == lam(0, 0) for fp in problem.fixed_points)
    assert localization.lefschetz_duality_check(problem)
    assert localization.lefschetz_duality_check(rarita_schwinger.rs_problem(sphere, 2))


def test_embed_fraction() -> None:
    """Test fractions move into a block of a larger torus."""
    f = CharFraction(GradedLaurentPoly.monomial(lam(2, 1)), [lam(1, -1)])
    embedded = rarita_schwinger.embed_fraction(f, 1, 4)
    assert embedded == CharFraction(GradedLaurentPoly.monomial(lam(0, 2, 1, 0)), [lam(0, 1, -1, 0)])


def test_product_problem(sphere: FixedPointProblem) -> None:
    """Test the fixed points of a product are the pairs of fixed points."""
    product = rarita_schwinger.product_problem(cp2(), sphere)
    assert product.rank == 3
    assert product.dim == 3
    assert product.root_order == 2
    assert product.chamber == Chamber.of([1, 2, 1])
    assert len(product.fixed_points) == 6
    point = product.fixed_point("([0:1:0], [1:0])")
    assert point.weights == (lam(-1, 0, 0), lam(-1, 1, 0), lam(0, 0, -1))

    with pytest.raises(ValueError):
        rarita_schwinger.product_problem(parse_problem("cusp_lott.json").problem, sphere)


@pytest.mark.parametrize("k", [-1, 0, 1])
def test_rs_product_formula(sphere: FixedPointProblem, k: int) -> None:
    """Test the product formula for the Rarita-Schwinger index."""
    assert rarita_schwinger.rs_product_check(sphere, sphere, k)
    assert rarita_schwinger.rs_product_check(cp2(), sphere, k)


def test_rs_index_of_cp2() -> None:
    """Test the index of the projective plane does not depend on the chamber."""
    problem = cp2()
    flipped = problem.model_copy(update={"chamber": Chamber.of([2, 1])})
    for k in (0, 1):
        assert frac_equals(rarita_schwinger.rs_index(problem, k), rarita_schwinger.rs_index(flipped, k))


def test_singular_points_raise() -> None:
    """Test twisted contributions need smooth points."""
    singular = FixedPoint(name="s", explicit_contribution=((0, CharFraction.one(1)),))
    with pytest.raises(ValueError):
        rarita_schwinger.rs_contribution(singular, 0, Chamber.of([1]), 1)
    with pytest.raises(ValueError):
        rarita_schwinger.spin_contribution(singular, Chamber.of([1]), 1)


@pytest.mark.parametrize("weights, expected", [
    ([lam(1)], 2),
    ([lam(1), lam(1)], 2),
    ([lam(1), lam(2)], 2),
    ([lam(1), lam(5)], 5),
    ([lam(-3)], 2),
])
def test_rs_kernel_bound(weights: list[tuple[Fraction, ...]], expected: int) -> None:
    """Test the kernel bound counts lattice points below each weight."""
    assert rarita_schwinger.rs_kernel_bound(weights) == expected


def test_rs_kernel_bound_errors() -> None:
    """Test the kernel bound needs integer magnitudes."""
    assert rarita_schwinger.rs_kernel_bound([lam(1, -1), lam(0, 1)], Chamber.of([2, 1])) == 2

    with pytest.raises(ValueError):
        rarita_schwinger.rs_kernel_bound([lam(1, 1)])
    with pytest.raises(ValueError):
        rarita_schwinger.rs_kernel_bound([lam("1/2")])
    with pytest.raises(ValueError):
        rarita_schwinger.rs_kernel_bound([lam(1, -2)], Chamber.of([2, 1]))
