from fractions import Fraction

import hypothesis.strategies as st
import pytest
import sympy as sp
from hypothesis import given, settings

from equivariant_morse import algebra
from equivariant_morse.algebra import GradedLaurentPoly, Scalar


def lam(*coords: int | str) -> tuple[Fraction, ...]:
    return algebra.make_exponent(coords)


def test_parse_rational() -> None:
    """Test parsing exact rationals from ints, strings and fractions."""
    assert algebra.parse_rational(3) == Fraction(3)
    assert algebra.parse_rational("-7/4") == Fraction(-7, 4)
    assert algebra.parse_rational("6/4") == Fraction(3, 2)
    assert algebra.parse_rational(Fraction(1, 3)) == Fraction(1, 3)

    # Floats are not exact
    with pytest.raises(ValueError):
        algebra.parse_rational(0.5)  # type: ignore[arg-type]

    with pytest.raises(ValueError):
        algebra.parse_rational("1/0")

    with pytest.raises(ValueError):
        algebra.parse_rational("half")


@pytest.mark.parametrize("text, real, imaginary", [
    ("2", Fraction(2), Fraction(0)),
    ("-1/2", Fraction(-1, 2), Fraction(0)),
    ("1/2+i3/4", Fraction(1, 2), Fraction(3, 4)),
    ("1-i", Fraction(1), Fraction(-1)),
    ("i", Fraction(0), Fraction(1)),
    ("-i", Fraction(0), Fraction(-1)),
    ("-i2/3", Fraction(0), Fraction(-2, 3)),
    ("3 + i", Fraction(3), Fraction(1)),
])
def test_scalar_parse(text: str, real: Fraction, imaginary: Fraction) -> None:
    """Test the text form of Gaussian rationals."""
    value = Scalar.parse(text)
    assert value == Scalar(real, imaginary)
    # The printed form parses back to the same value
    assert Scalar.parse(str(value)) == value


def test_scalar_parse_errors() -> None:
    """Test malformed Gaussian rationals."""
    for text in ["", "1i", "1+2", "i+1", "abc", "1/2/3"]:
        with pytest.raises(ValueError):
            Scalar.parse(text)


def test_scalar_arithmetic() -> None:
    """Test exact Gaussian rational arithmetic."""
    one_plus_i = Scalar.parse("1+i")
    assert one_plus_i * one_plus_i.conjugate() == Scalar(Fraction(2))
    assert algebra.I ** 2 == Scalar(Fraction(-1))
    assert one_plus_i / one_plus_i == algebra.ONE
    assert one_plus_i ** -1 == Scalar.parse("1/2-i1/2")
    assert 1 - one_plus_i == Scalar.parse("-i")
    assert str(Scalar(Fraction(-3, 2))) == "-3/2"
    assert not algebra.ZERO

    with pytest.raises(ZeroDivisionError):
        one_plus_i / algebra.ZERO

    with pytest.raises(TypeError):
        algebra.as_scalar(0.5)  # type: ignore[arg-type]

    assert Scalar(Fraction(3)).is_nonnegative_integer()
    assert not Scalar(Fraction(-1)).is_nonnegative_integer()
    assert not Scalar(Fraction(1, 2)).is_nonnegative_integer()
    assert not algebra.I.is_nonnegative_integer()
    assert not algebra.I.is_real()


def test_exponents() -> None:
    """Test exponent vector helpers."""
    assert algebra.exp_add(lam(1, 2), lam(-1, 1)) == lam(0, 3)
    assert algebra.exp_sub(lam(1, 2), lam(1, 2)) == algebra.zero_exponent(2)
    assert algebra.exp_scale(lam(1, -3), "1/2") == lam("1/2", "-3/2")
    assert algebra.pairing(lam(2, 1), lam(-1, 1)) == Fraction(-1)
    assert algebra.is_canonical_orientation(lam(0, 1))
    assert not algebra.is_canonical_orientation(lam(0, -1, 5))
    assert algebra.exponent_denominators(lam("1/2", "3/4", 1)) == {1, 2, 4}

    with pytest.raises(ValueError):
        algebra.is_canonical_orientation(lam(0, 0))

    with pytest.raises(ValueError):
        algebra.exp_add(lam(1), lam(1, 1))


def test_graded_laurent_poly_arithmetic() -> None:
    """Test sums and products keep the b and y grading."""
    one = GradedLaurentPoly.constant(2)
    x = GradedLaurentPoly.monomial(lam(1, 0))
    b_y = GradedLaurentPoly.constant(2, 1, deg_b=1, deg_y=1)

    # (1 + λ)(1 - λ) = 1 - λ^2
    assert (one + x) * (one - x) == one - GradedLaurentPoly.monomial(lam(2, 0))
    assert algebra.poly_mul(x, b_y).coefficient(lam(1, 0), 1, 1) == algebra.ONE
    assert algebra.poly_add(x, -x) == GradedLaurentPoly.zero(2)
    assert not GradedLaurentPoly.zero(2)

    # Zero coefficients are dropped
    assert len(GradedLaurentPoly.from_flat(2, {(lam(1, 1), 0, 0): 0})) == 0

    with pytest.raises(ValueError):
        x + GradedLaurentPoly.constant(1)

    with pytest.raises(ValueError):
        GradedLaurentPoly.from_flat(2, {(lam(1), 0, 0): 1})

    with pytest.raises(ValueError):
        GradedLaurentPoly.constant(2, 1, deg_b=-1)

    with pytest.raises(ValueError):
        GradedLaurentPoly(0)


def test_graded_laurent_poly_views() -> None:
    """Test the shift, grading split and monomial helpers."""
    p = (GradedLaurentPoly.constant(1)
         + GradedLaurentPoly.monomial(lam(2), 3, deg_b=1)
         + GradedLaurentPoly.monomial(lam(1), 1, deg_b=1, deg_y=2))

    assert p.shift(lam(1), deg_b=1).coefficient(lam(3), 2) == Scalar(Fraction(3))
    assert p.b_part(1) == (GradedLaurentPoly.monomial(lam(2), 3)
                           + GradedLaurentPoly.monomial(lam(1), 1, deg_y=2))
    assert sorted(p.split_by_b()) == [0, 1]
    assert p.max_b_degree() == 1
    assert p.max_y_degree() == 2
    assert not p.has_trivial_grading()
    assert p.exponents() == {lam(0), lam(1), lam(2)}
    assert p.terms[lam(2)].terms == {(1, 0): Scalar(Fraction(3))}

    # Items are sorted by b degree, y degree, then exponent
    assert [key for key, _ in p.items()] == [(lam(0), 0, 0), (lam(2), 1, 0), (lam(1), 1, 2)]

    assert GradedLaurentPoly.monomial(lam(-1, 2), 5).as_monomial() == (lam(-1, 2), Scalar(Fraction(5)))
    assert GradedLaurentPoly.monomial(lam(1), deg_b=1).as_monomial() is None
    assert p.as_monomial() is None


def test_invert_and_eval_grading() -> None:
    """Test variable inversion and the substitution of b and y."""
    p = (GradedLaurentPoly.monomial(lam(1, -2))
         + GradedLaurentPoly.monomial(lam(0, 1), 2, deg_b=1, deg_y=1))
    inverted = algebra.invert_variables(p)
    assert inverted.coefficient(lam(-1, 2)) == algebra.ONE
    assert inverted.coefficient(lam(0, -1), 1, 1) == Scalar(Fraction(2))
    assert algebra.invert_variables(inverted) == p

    # b = -1 keeps y when no value is given
    evaluated = algebra.eval_grading(p, -1)
    assert evaluated.coefficient(lam(0, 1), 0, 1) == Scalar(Fraction(-2))
    assert algebra.eval_grading(p, -1, 1).has_trivial_grading()
    assert algebra.eval_grading(p, -1, 1).coefficient(lam(0, 1)) == Scalar(Fraction(-2))
    assert algebra.eval_grading(p, algebra.I, 1).coefficient(lam(0, 1)) == Scalar.parse("i2")


def test_format_poly() -> None:
    """Test the deterministic text form."""
    p = GradedLaurentPoly.constant(2) + GradedLaurentPoly.monomial(lam(5, -1), deg_b=2)
    assert algebra.format_poly(p) == "1 + b^2*λ^5*μ^-1"
    assert algebra.format_poly(GradedLaurentPoly.monomial(lam("-1/2"))) == "λ^(-1/2)"
    assert algebra.format_poly(GradedLaurentPoly.zero(3)) == "0"
    assert algebra.format_poly(GradedLaurentPoly.constant(1) - GradedLaurentPoly.monomial(lam(1))) == "1 - λ"
    assert algebra.format_poly(GradedLaurentPoly.monomial(lam(1), Scalar.parse("1+i"))) == "(1+i)*λ"
    assert algebra.format_poly(GradedLaurentPoly.constant(1, 2, deg_b=1, deg_y=1)) == "2*b*y"
    assert algebra.format_poly(GradedLaurentPoly.monomial(lam(0, 1)), ("x", "z")) == "z"
    assert algebra.variable_names(4) == ("λ1", "λ2", "λ3", "λ4")
    assert algebra.variable_names(3) == ("λ", "μ", "ν")


def test_graded_coeff() -> None:
    """Test the b and y coefficient polynomials."""
    # 2 + 3b - i b y^2
    coeff = algebra.GradedCoeff({(0, 0): 2, (1, 0): 3, (1, 2): Scalar.parse("-i"), (2, 2): 0})
    assert len(coeff.terms) == 3
    assert coeff.evaluate(-1, 1) == Scalar.parse("-1+i")
    assert coeff.evaluate(algebra.I, 2) == Scalar.parse("6+i3")
    assert (coeff - coeff) == algebra.GradedCoeff()
    assert not algebra.GradedCoeff({(3, 1): 0})

    # (1 + b)(1 - b) = 1 - b^2
    one_plus_b = algebra.GradedCoeff({(0, 0): 1, (1, 0): 1})
    one_minus_b = algebra.GradedCoeff({(0, 0): 1, (1, 0): -1})
    assert one_plus_b * one_minus_b == algebra.GradedCoeff({(0, 0): 1, (2, 0): -1})

    with pytest.raises(ValueError):
        algebra.GradedCoeff({(-1, 0): 1})


@st.composite
def graded_polys(draw: st.DrawFn, rank: int) -> GradedLaurentPoly:
    """Polynomials with half integer exponents in [-2, 2] and small b, y degrees."""
    coords = st.integers(min_value=-4, max_value=4).map(lambda n: Fraction(n, 2))
    key = st.tuples(st.tuples(*[coords] * rank), st.integers(0, 2), st.integers(0, 1))
    value = st.builds(Scalar, st.integers(-3, 3), st.integers(-1, 1))
    return GradedLaurentPoly.from_flat(rank, draw(st.dictionaries(key, value, max_size=4)))


scalars = st.builds(Scalar, st.integers(-3, 3), st.integers(-3, 3))


def test_scalar_sympy_conversion() -> None:
    """Test the conversion between scalars and sympy expressions."""
    value = Scalar.parse("1/2-i3")
    assert value.to_sympy() == sp.Rational(1, 2) - 3 * sp.I
    assert Scalar.from_sympy(value.to_sympy()) == value
    assert Scalar.from_sympy((1 + sp.I) ** 2) == Scalar.parse("i2")
    assert Scalar(0, 1) ** 0 == algebra.ONE
    assert hash(Scalar(Fraction(1, 2))) == hash(Scalar.parse("1/2"))

    with pytest.raises(ValueError):
        Scalar.from_sympy(sp.sqrt(2))

    with pytest.raises(ZeroDivisionError):
        algebra.ZERO ** -1


def test_fractional_exponents_and_normal_form() -> None:
    """Test that equal values built along different paths compare and hash equal."""
    half = GradedLaurentPoly.monomial(lam("1/2"))
    one = GradedLaurentPoly.constant(1)
    square = (one + half) * (one + half)
    expected = (one + half.scale(2) + GradedLaurentPoly.monomial(lam(1)))
    assert square == expected
    assert hash(square) == hash(expected)
    assert square.exponents() == {lam(0), lam("1/2"), lam(1)}

    # λ^(1/3) λ^(2/3) = λ
    third = GradedLaurentPoly.monomial(lam("1/3"))
    assert third * third.shift(lam("1/3")) == GradedLaurentPoly.monomial(lam(1))
    assert (half - half) == GradedLaurentPoly.zero(1)
    assert algebra.format_poly(third.shift(lam("-1/2"), deg_y=1)) == "y*λ^(-1/6)"


def test_exact_quotient() -> None:
    """Test exact division in the Laurent ring."""
    one = GradedLaurentPoly.constant(2)
    x = GradedLaurentPoly.monomial(lam(1, 0))
    y = GradedLaurentPoly.monomial(lam(0, -1))
    b = GradedLaurentPoly.constant(2, deg_b=1)

    product = (one - x) * (one + y + b).shift(lam(-3, 2))
    assert product.exact_quotient(one - x) == (one + y + b).shift(lam(-3, 2))
    assert (one + x).exact_quotient(one - x) is None
    assert GradedLaurentPoly.zero(2).exact_quotient(one - x) == GradedLaurentPoly.zero(2)

    # λ^(-1/2) - λ^(1/2) = λ^(-1/2) (1 - λ)
    half = GradedLaurentPoly.monomial(lam("-1/2")) - GradedLaurentPoly.monomial(lam("1/2"))
    line = GradedLaurentPoly.constant(1) - GradedLaurentPoly.monomial(lam(1))
    assert half.exact_quotient(line) == GradedLaurentPoly.monomial(lam("-1/2"))

    with pytest.raises(ZeroDivisionError):
        one.exact_quotient(GradedLaurentPoly.zero(2))


def test_select() -> None:
    """Test filtering terms by their flat key."""
    p = GradedLaurentPoly.from_flat(1, {(lam(0), 0, 0): 1, (lam(2), 1, 0): 3, (lam(-1), 0, 1): 2})
    assert p.select(lambda key: key[0][0] >= 0) == GradedLaurentPoly.from_flat(
        1, {(lam(0), 0, 0): 1, (lam(2), 1, 0): 3})
    assert not p.select(lambda key: False)


@settings(max_examples=200, deadline=None)
@given(graded_polys(2), graded_polys(2), graded_polys(2))
def test_ring_axioms(p: GradedLaurentPoly, q: GradedLaurentPoly, r: GradedLaurentPoly) -> None:
    """Test associativity, commutativity and distributivity on random triples."""
    assert (p + q) + r == p + (q + r)
    assert (p * q) * r == p * (q * r)
    assert p * q == q * p
    assert p * (q + r) == p * q + p * r
    assert p - p == GradedLaurentPoly.zero(2)
    assert p * GradedLaurentPoly.constant(2) == p


@settings(max_examples=200, deadline=None)
@given(graded_polys(2), graded_polys(2))
def test_inversion_is_an_involutive_homomorphism(p: GradedLaurentPoly, q: GradedLaurentPoly) -> None:
    """Test that inverting the variables twice is the identity and respects products."""
    assert algebra.invert_variables(algebra.invert_variables(p)) == p
    assert algebra.invert_variables(p * q) == algebra.invert_variables(p) * algebra.invert_variables(q)
    assert {algebra.exp_neg(e) for e in p.exponents()} == algebra.invert_variables(p).exponents()


@settings(max_examples=200, deadline=None)
@given(graded_polys(1), graded_polys(1), scalars, scalars)
def test_eval_grading_is_a_homomorphism(p: GradedLaurentPoly, q: GradedLaurentPoly,
                                        b_val: Scalar, y_val: Scalar) -> None:
    """Test that substituting b and y commutes with sums and products."""
    def evaluate(poly: GradedLaurentPoly) -> GradedLaurentPoly:
        return algebra.eval_grading(poly, b_val, y_val)

    assert evaluate(p + q) == evaluate(p) + evaluate(q)
    assert evaluate(p * q) == evaluate(p) * evaluate(q)
    assert evaluate(p).has_trivial_grading()


@settings(max_examples=200, deadline=None)
@given(graded_polys(2), graded_polys(2))
def test_exact_quotient_recovers_factor(p: GradedLaurentPoly, q: GradedLaurentPoly) -> None:
    """Test that a product divided by a nonzero factor gives the other factor back."""
    if q:
        assert (p * q).exact_quotient(q) == p
