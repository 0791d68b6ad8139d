import math
from fractions import Fraction

import hypothesis.strategies as st
import pytest
from hypothesis import assume, given, settings

from equivariant_morse import charfrac
from equivariant_morse.algebra import GradedLaurentPoly, Scalar, exp_add, exp_neg, make_exponent, pairing
from equivariant_morse.charfrac import Chamber, ChamberSeries, CharFraction

# Generic for every nonzero exponent with coordinates in [-3, 3]
GENERIC_CHAMBERS = {1: (1,), 2: (1, 4), 3: (1, 4, 16)}


def lam(*coords: int | str) -> tuple[Fraction, ...]:
    return make_exponent(coords)


def poly(rank: int, terms: dict[tuple[int, ...], int]) -> GradedLaurentPoly:
    total = GradedLaurentPoly.zero(rank)
    for exponent, coeff in terms.items():
        total = total + GradedLaurentPoly.monomial(lam(*exponent), coeff)
    return total


@st.composite
def char_fractions(draw: st.DrawFn, rank: int | None = None) -> CharFraction:
    """Fractions with at most 3 variables and 4 denominator factors."""
    if rank is None:
        rank = draw(st.integers(min_value=1, max_value=3))
    coords = st.integers(min_value=-3, max_value=3)
    factor = st.tuples(*[coords] * rank).filter(any)
    small = st.tuples(*[st.integers(min_value=-1, max_value=1)] * rank)
    numerator = draw(st.dictionaries(small, st.integers(min_value=-3, max_value=3), min_size=1, max_size=3))
    denominator = draw(st.lists(factor, min_size=0, max_size=4))
    return CharFraction(poly(rank, numerator), [lam(*u) for u in denominator])


@st.composite
def fraction_pairs(draw: st.DrawFn) -> tuple[CharFraction, CharFraction]:
    rank = draw(st.integers(min_value=1, max_value=3))
    return draw(char_fractions(rank)), draw(char_fractions(rank))


def geometric_oracle(f: CharFraction, xi: tuple[int, ...], T: int) -> GradedLaurentPoly:
    """
    Brute force expansion: every factor becomes its own truncated geometric
    series, multiplied in one by one and cut back to level T.
    """
    def level(exponent: tuple[Fraction, ...]) -> Fraction:
        return pairing([Fraction(c) for c in xi], exponent)

    lowest = min((level(e) for e in f.numerator.exponents()), default=Fraction(0))
    current = f.numerator
    for u in f.denominator:
        rise = level(u)
        step, sign, first = (u, 1, 0) if rise > 0 else (exp_neg(u), -1, 1)
        reach = math.floor((T - lowest) / abs(rise))
        series = GradedLaurentPoly.zero(f.rank)
        for k in range(first, reach + 1):
            exponent = tuple(Fraction(0) for _ in range(f.rank))
            for _ in range(k):
                exponent = exp_add(exponent, step)
            series = series + GradedLaurentPoly.monomial(exponent, sign)
        current = GradedLaurentPoly.from_flat(
            f.rank, {key: value for key, value in (current * series).flat().items() if level(key[0]) <= T})
    return GradedLaurentPoly.from_flat(
        f.rank, {key: value for key, value in current.flat().items() if level(key[0]) <= T})


def test_char_fraction_construction() -> None:
    """Test the zero fraction and invalid denominators."""
    zero = CharFraction(GradedLaurentPoly.zero(1), [lam(1)])
    assert zero.denominator == ()
    assert zero == CharFraction.zero(1)
    assert not zero

    with pytest.raises(ValueError):
        CharFraction(GradedLaurentPoly.constant(1), [lam(0)])

    with pytest.raises(ValueError):
        CharFraction(GradedLaurentPoly.constant(1), [lam(1, 1)])


def test_canonicalize() -> None:
    """Test 1/(1 - λ⁻¹) becomes -λ/(1 - λ)."""
    f = CharFraction(GradedLaurentPoly.constant(1), [lam(-1)])
    canonical = charfrac.canonicalize(f)
    assert canonical == CharFraction(GradedLaurentPoly.monomial(lam(1), -1), [lam(1)])
    assert canonical.is_canonical()
    assert not f.is_canonical()
    assert charfrac.frac_equals(f, canonical)

    # Mixed orientations in two variables
    g = CharFraction(GradedLaurentPoly.constant(2), [lam(0, -2), lam(1, -1)])
    assert charfrac.canonicalize(g).denominator == (lam(0, 2), lam(1, -1))


def test_frac_add_and_reduce() -> None:
    """Test exact sums and the reduction to Laurent polynomials."""
    one = GradedLaurentPoly.constant(1)
    # 1/(1 - λ) - λ/(1 - λ) = 1
    south = CharFraction(one, [lam(1)])
    north = CharFraction(GradedLaurentPoly.monomial(lam(1), -1), [lam(1)])
    total = charfrac.frac_add(south, north)
    assert charfrac.frac_reduce(total) == one
    assert charfrac.frac_equals(total, CharFraction.one(1))

    # (1 - λ^2)/(1 - λ) = 1 + λ
    f = CharFraction(one - GradedLaurentPoly.monomial(lam(2)), [lam(1)])
    assert charfrac.frac_reduce(f) == one + GradedLaurentPoly.monomial(lam(1))
    assert charfrac.frac_reduce(south) is None
    assert charfrac.frac_reduce(CharFraction.zero(1)) == GradedLaurentPoly.zero(1)

    assert charfrac.divide_by_factor(one - GradedLaurentPoly.monomial(lam(3)), lam(1)) == poly(1, {(0,): 1, (1,): 1, (2,): 1})
    assert charfrac.divide_by_factor(one + GradedLaurentPoly.monomial(lam(1)), lam(1)) is None

    # Sums over repeated factors use the maximum multiplicity
    double = CharFraction(one, [lam(1), lam(1)])
    assert charfrac.frac_add(double, south).denominator == (lam(1), lam(1))
    assert charfrac.frac_sum([south, north, CharFraction.zero(1)], 1) == total
    assert charfrac.frac_sub(south, south) == CharFraction.zero(1)
    assert (south - south) == CharFraction.zero(1)

    with pytest.raises(ValueError):
        charfrac.frac_add(south, CharFraction.one(2))


def test_frac_mul_scale_and_invert() -> None:
    """Test products, scaling and the substitution λ ↦ λ⁻¹."""
    one = GradedLaurentPoly.constant(2)
    f = CharFraction(one, [lam(1, 0)])
    g = CharFraction(GradedLaurentPoly.monomial(lam(0, 1)), [lam(0, -1)])
    product = charfrac.frac_mul(f, g)
    assert product.is_canonical()
    assert charfrac.frac_equals(product, f * g)

    scaled = charfrac.frac_scale(f, GradedLaurentPoly.monomial(lam(1, 1), deg_b=1))
    assert scaled.numerator == GradedLaurentPoly.monomial(lam(1, 1), deg_b=1)
    assert charfrac.frac_scale(f, 3).numerator == one.scale(3)
    assert charfrac.frac_neg(f).numerator == -one

    # 1/(1 - λ) ↦ 1/(1 - λ⁻¹) = -λ/(1 - λ)
    inverted = charfrac.frac_invert_vars(f)
    assert inverted == CharFraction(GradedLaurentPoly.monomial(lam(1, 0), -1), [lam(1, 0)])
    assert charfrac.frac_equals(charfrac.frac_invert_vars(inverted), f)

    graded = CharFraction(GradedLaurentPoly.constant(1, 1, deg_b=2, deg_y=1), [lam(1)])
    assert charfrac.frac_eval_grading(graded, -1, 1).numerator == GradedLaurentPoly.constant(1)

    assert charfrac.format_fraction(CharFraction(one, [lam(2, 0), lam(0, 2)])) == "(1)/((1 - μ^2)*(1 - λ^2))"
    assert charfrac.format_fraction(CharFraction.one(1)) == "1"


def test_chamber() -> None:
    """Test chamber pairing, opposite, rescaling and genericity."""
    c = Chamber.of(["2", "1"])
    assert c.rank == 2
    assert c.pairing(lam(-1, 1)) == Fraction(-1)
    assert c.opposite() == Chamber.of([-2, -1])
    assert c.scaled(2) == Chamber.of([4, 2])
    c.check_generic([lam(1, 0), lam(1, -1)])

    with pytest.raises(ValueError):
        c.check_generic([lam(1, -2)])

    with pytest.raises(ValueError):
        c.check_generic([lam(1)])

    with pytest.raises(ValueError):
        c.scaled(-1)

    with pytest.raises(ValueError):
        Chamber(())


def test_chamber_expand() -> None:
    """Test the geometric series in both chambers."""
    f = CharFraction(GradedLaurentPoly.constant(1), [lam(1)])

    series = charfrac.chamber_expand(f, Chamber.of([1]), 3)
    assert series.terms == poly(1, {(0,): 1, (1,): 1, (2,): 1, (3,): 1})

    # In the opposite chamber 1/(1 - λ) = -λ⁻¹ - λ⁻² - ...
    series = charfrac.chamber_expand(f, Chamber.of([-1]), 3)
    assert series.terms == poly(1, {(-1,): -1, (-2,): -1, (-3,): -1})

    # Fractional cutoff and exponents
    half = CharFraction(GradedLaurentPoly.monomial(lam("1/2")), [lam(1)])
    series = charfrac.chamber_expand(half, Chamber.of([1]), "5/2")
    assert series.terms.exponents() == {lam("1/2"), lam("3/2"), lam("5/2")}

    with pytest.raises(ValueError):
        charfrac.chamber_expand(CharFraction(GradedLaurentPoly.constant(2), [lam(1, -2)]),
                                Chamber.of([2, 1]), 4)


def test_chamber_series() -> None:
    """Test coefficient access, windows and re-truncating arithmetic."""
    c = Chamber.of([1])
    f = CharFraction(GradedLaurentPoly.constant(1), [lam(1)])
    series = charfrac.chamber_expand(f, c, 4)
    assert series.coefficient(lam(2)) == Scalar(Fraction(1))
    assert series.window(1, 2) == poly(1, {(1,): 1, (2,): 1})

    with pytest.raises(ValueError):
        series.coefficient(lam(5))

    shorter = charfrac.chamber_expand(f, c, 2)
    assert (series + shorter).cutoff == Fraction(2)
    assert (series + shorter).terms == poly(1, {(0,): 2, (1,): 2, (2,): 2})

    # 1/(1 - λ)^2 = Σ (k + 1) λ^k
    square = series * series
    assert square.terms == poly(1, {(0,): 1, (1,): 2, (2,): 3, (3,): 4, (4,): 5})

    shifted = series.multiply_poly(GradedLaurentPoly.monomial(lam(-1)))
    assert shifted.cutoff == Fraction(3)

    with pytest.raises(ValueError):
        series + charfrac.chamber_expand(f, c.opposite(), 4)

    with pytest.raises(ValueError):
        ChamberSeries(c, 1, GradedLaurentPoly.constant(2))


@settings(max_examples=500, deadline=None)
@given(char_fractions(), st.sampled_from([4, 8]))
def test_chamber_expand_matches_geometric_oracle(f: CharFraction, T: int) -> None:
    """Test the chamber expansion against brute force geometric series."""
    xi = GENERIC_CHAMBERS[f.rank]
    series = charfrac.chamber_expand(f, Chamber.of(xi), T)
    assert series.terms == geometric_oracle(f, xi, T)


@settings(max_examples=200, deadline=None)
@given(char_fractions())
def test_canonical_forms_and_inversion(f: CharFraction) -> None:
    """Test canonicalization and inversion are value preserving involutions."""
    canonical = charfrac.canonicalize(f)
    assert canonical.is_canonical()
    assert charfrac.canonicalize(canonical) == canonical
    assert charfrac.frac_equals(f, canonical)
    assert charfrac.frac_equals(charfrac.frac_invert_vars(charfrac.frac_invert_vars(f)), f)


@settings(max_examples=200, deadline=None)
@given(char_fractions(), st.sampled_from([4, 8]))
def test_frac_equals_agrees_with_expansion(f: CharFraction, T: int) -> None:
    """Test equal fractions written differently expand to the same series."""
    xi = Chamber.of(GENERIC_CHAMBERS[f.rank])
    extra = tuple(Fraction(1) for _ in range(f.rank))
    # Multiply numerator and denominator by the same factor (1 - λ^extra)
    widened = CharFraction(
        f.numerator * (GradedLaurentPoly.constant(f.rank) - GradedLaurentPoly.monomial(extra)),
        f.denominator + (extra,))
    assert charfrac.frac_equals(f, widened)
    assert charfrac.chamber_expand(f, xi, T) == charfrac.chamber_expand(widened, xi, T)
    assert charfrac.frac_equals(f + widened, charfrac.frac_scale(f, 2))
    assert not charfrac.frac_equals(f, f + CharFraction.one(f.rank))


@settings(max_examples=200, deadline=None)
@given(fraction_pairs(), st.sampled_from([4, 8]))
def test_chamber_expand_is_additive(pair: tuple[CharFraction, CharFraction], T: int) -> None:
    """Test expanding a sum gives the sum of the expansions."""
    f, g = pair
    assume(not charfrac.frac_equals(f, g))
    c = Chamber.of(GENERIC_CHAMBERS[f.rank])
    total = charfrac.chamber_expand(f + g, c, T)
    assert total == charfrac.chamber_expand(f, c, T) + charfrac.chamber_expand(g, c, T)
    assert total.terms == (charfrac.chamber_expand(f, c, T).terms + charfrac.chamber_expand(g, c, T).terms)


@settings(max_examples=200, deadline=None)
@given(fraction_pairs())
def test_frac_equals_is_an_equivalence(pair: tuple[CharFraction, CharFraction]) -> None:
    """Test symmetry and transitivity of fraction equality across rewritten forms."""
    f, other = pair
    step = tuple(Fraction(1 if index == 0 else 0) for index in range(f.rank))
    factor = GradedLaurentPoly.constant(f.rank) - GradedLaurentPoly.monomial(step)
    canonical = charfrac.canonicalize(f)
    # The same value as given, canonical, and widened by (1 - λ^step)
    forms = [f, canonical, CharFraction(canonical.numerator * factor, canonical.denominator + (step,))]
    for first in forms:
        for second in forms:
            assert charfrac.frac_equals(first, second)
        assert charfrac.frac_equals(first, other) == charfrac.frac_equals(other, first)
        assert charfrac.frac_equals(first, other) == charfrac.frac_equals(f, other)
