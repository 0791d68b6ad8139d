"""
Character fractions: a graded Laurent polynomial over a multiset of factors
`(1 - λ^u)`, together with canonicalization, exact equality and the
chamber dependent expansion into truncated power series.
"""
import logging
import math
from collections import Counter
from collections.abc import Iterable
from dataclasses import dataclass
from fractions import Fraction

from equivariant_morse.algebra import (
    Exponent,
    GradedLaurentPoly,
    RationalLike,
    Scalar,
    ScalarLike,
    eval_grading,
    exp_neg,
    exp_scale,
    format_monomial,
    format_poly,
    invert_variables,
    is_canonical_orientation,
    pairing,
    parse_rational,
)

logger = logging.getLogger(__name__)


class CharFraction:
    """
    A numerator `GradedLaurentPoly` over the product of `(1 - λ^u)` for each
    exponent `u` in the denominator multiset.

    The zero fraction is always stored with an empty denominator and an empty
    denominator means the fraction is a Laurent polynomial.

    Attributes:
        numerator: The numerator.
        denominator: The sorted multiset of denominator exponents.
    """

    __slots__ = ("_numerator", "_denominator")

    def __init__(self, numerator: GradedLaurentPoly,
                 denominator: Iterable[Exponent] = ()) -> None:
        factors = tuple(sorted(tuple(Fraction(c) for c in u) for u in denominator))
        for u in factors:
            if len(u) != numerator.rank:
                raise ValueError(f"Denominator exponent {u} does not match the rank "
                                 f"{numerator.rank}")
            if all(coord == 0 for coord in u):
                raise ValueError("Denominator exponents must be nonzero, (1 - λ^0) vanishes")
        self._numerator = numerator
        self._denominator = factors if numerator else ()

    @classmethod
    def zero(cls, rank: int) -> "CharFraction":
        return cls(GradedLaurentPoly.zero(rank))

    @classmethod
    def one(cls, rank: int) -> "CharFraction":
        return cls(GradedLaurentPoly.constant(rank))

    @property
    def numerator(self) -> GradedLaurentPoly:
        return self._numerator

    @property
    def denominator(self) -> tuple[Exponent, ...]:
        return self._denominator

    @property
    def rank(self) -> int:
        return self._numerator.rank

    def is_canonical(self) -> bool:
        return all(is_canonical_orientation(u) for u in self._denominator)

    def __bool__(self) -> bool:
        return bool(self._numerator)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CharFraction):
            return NotImplemented
        return (self._numerator == other._numerator
                and self._denominator == other._denominator)

    def __hash__(self) -> int:
        return hash((self._numerator, self._denominator))

    def __repr__(self) -> str:
        return f"CharFraction({format_fraction(self)!r})"

    def __add__(self, other: "CharFraction") -> "CharFraction":
        return frac_add(self, other)

    def __neg__(self) -> "CharFraction":
        return frac_neg(self)

    def __sub__(self, other: "CharFraction") -> "CharFraction":
        return frac_add(self, frac_neg(other))

    def __mul__(self, other: "CharFraction") -> "CharFraction":
        return frac_mul(self, other)


def factor_product(rank: int, factors: Iterable[Exponent]) -> GradedLaurentPoly:
    """The Laurent polynomial `∏ (1 - λ^u)`."""
    product = GradedLaurentPoly.constant(rank)
    for u in factors:
        product = product * (GradedLaurentPoly.constant(rank)
                             - GradedLaurentPoly.monomial(u))
    return product


def _union_denominator(first: tuple[Exponent, ...],
                       second: tuple[Exponent, ...]) -> tuple[Exponent, ...]:
    # Shared factors are counted at their maximum multiplicity.
    union = Counter(first) | Counter(second)
    return tuple(sorted(union.elements()))


def _complement(union: tuple[Exponent, ...],
                part: tuple[Exponent, ...]) -> tuple[Exponent, ...]:
    return tuple(sorted((Counter(union) - Counter(part)).elements()))


def _check_rank(f: CharFraction, g: CharFraction) -> None:
    if f.rank != g.rank:
        raise ValueError(f"Rank mismatch: {f.rank} != {g.rank}")


def canonicalize(f: CharFraction) -> CharFraction:
    """
    Rewrites every denominator factor into canonical orientation (first
    nonzero coordinate positive) with `1 - λ^{-u} = -λ^{-u} (1 - λ^u)`,
    adjusting the numerator so the value is unchanged.

    Args:
        f: The fraction.
    Returns:
        CharFraction: An equal fraction whose denominator is canonical.
    Raises:
        ValueError: If a denominator exponent is zero.
    """
    numerator = f.numerator
    factors: list[Exponent] = []
    for u in f.denominator:
        if is_canonical_orientation(u):
            factors.append(u)
            continue
        flipped = exp_neg(u)
        numerator = numerator.shift(flipped).scale(Scalar(-1))
        factors.append(flipped)
    return CharFraction(numerator, factors)


def frac_add(f: CharFraction, g: CharFraction) -> CharFraction:
    """
    Sum of two fractions over the multiset union of their denominators.

    Raises:
        ValueError: If the ranks differ.
    """
    _check_rank(f, g)
    f, g = canonicalize(f), canonicalize(g)
    if not f:
        return g
    if not g:
        return f
    union = _union_denominator(f.denominator, g.denominator)
    numerator = (f.numerator * factor_product(f.rank, _complement(union, f.denominator))
                 + g.numerator * factor_product(g.rank, _complement(union, g.denominator)))
    return CharFraction(numerator, union)


def frac_sum(fractions: Iterable[CharFraction], rank: int) -> CharFraction:
    total = CharFraction.zero(rank)
    for fraction in fractions:
        total = frac_add(total, fraction)
    return total


def frac_neg(f: CharFraction) -> CharFraction:
    return CharFraction(-f.numerator, f.denominator)


def frac_sub(f: CharFraction, g: CharFraction) -> CharFraction:
    return frac_add(f, frac_neg(g))


def frac_mul(f: CharFraction, g: CharFraction) -> CharFraction:
    _check_rank(f, g)
    return canonicalize(CharFraction(f.numerator * g.numerator,
                                     f.denominator + g.denominator))


def frac_scale(f: CharFraction, factor: GradedLaurentPoly | ScalarLike) -> CharFraction:
    """Multiplies the numerator by a Laurent polynomial or a scalar."""
    if isinstance(factor, GradedLaurentPoly):
        return CharFraction(f.numerator * factor, f.denominator)
    return CharFraction(f.numerator.scale(factor), f.denominator)


def frac_equals(f: CharFraction, g: CharFraction) -> bool:
    """
    Exact equality of the two rational functions, decided by clearing both to
    the union denominator and comparing numerators.
    """
    if f.rank != g.rank:
        return False
    f, g = canonicalize(f), canonicalize(g)
    union = _union_denominator(f.denominator, g.denominator)
    left = f.numerator * factor_product(f.rank, _complement(union, f.denominator))
    right = g.numerator * factor_product(g.rank, _complement(union, g.denominator))
    return left == right


def frac_invert_vars(f: CharFraction) -> CharFraction:
    """
    Substitutes `λ ↦ λ⁻¹` in the numerator and every factor, then
    canonicalizes.
    """
    return canonicalize(CharFraction(invert_variables(f.numerator),
                                     [exp_neg(u) for u in f.denominator]))


def frac_eval_grading(f: CharFraction, b_val: ScalarLike,
                      y_val: ScalarLike | None = None) -> CharFraction:
    return CharFraction(eval_grading(f.numerator, b_val, y_val), f.denominator)


def divide_by_factor(p: GradedLaurentPoly, u: Exponent) -> GradedLaurentPoly | None:
    """
    Exact division of a Laurent polynomial by `(1 - λ^u)`.

    Args:
        p: The dividend.
        u: A nonzero exponent.
    Returns:
        GradedLaurentPoly | None: The quotient, or None when `(1 - λ^u)` does
            not divide `p`.
    """
    factor = GradedLaurentPoly.constant(p.rank) - GradedLaurentPoly.monomial(u)
    return p.exact_quotient(factor)


def frac_reduce(f: CharFraction) -> GradedLaurentPoly | None:
    """
    Returns the Laurent polynomial equal to `f`, or None if `f` is not one.
    """
    f = canonicalize(f)
    numerator: GradedLaurentPoly | None = f.numerator
    for u in f.denominator:
        numerator = divide_by_factor(numerator, u)
        if numerator is None:
            return None
    return numerator


def format_fraction(f: CharFraction, variables: tuple[str, ...] | None = None) -> str:
    """
    Text form `(numerator)/((1 - λ^2)*(1 - μ^2))`; Laurent polynomials print
    without a denominator.
    """
    numerator = format_poly(f.numerator, variables)
    if not f.denominator:
        return numerator
    factors = "*".join(f"(1 - {format_monomial(u, variables=variables)})"
                       for u in f.denominator)
    return f"({numerator})/({factors})"


@dataclass(frozen=True)
class Chamber:
    """
    A generic linear functional `xi` on the character lattice. Its sign on a
    weight decides whether the factor is attracting (positive) or expanding.

    Attributes:
        xi: The functional, one exact rational per torus variable.
    """

    xi: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "xi", tuple(parse_rational(c) for c in self.xi))
        if not self.xi:
            raise ValueError("A chamber needs at least one coordinate")

    @classmethod
    def of(cls, coords: Iterable[RationalLike]) -> "Chamber":
        return cls(tuple(parse_rational(c) for c in coords))

    @property
    def rank(self) -> int:
        return len(self.xi)

    def pairing(self, v: Exponent) -> Fraction:
        return pairing(self.xi, v)

    def opposite(self) -> "Chamber":
        return Chamber(tuple(-c for c in self.xi))

    def scaled(self, factor: RationalLike) -> "Chamber":
        factor = parse_rational(factor)
        if factor <= 0:
            raise ValueError(f"Chamber rescaling needs a positive factor, got: {factor}")
        return Chamber(tuple(c * factor for c in self.xi))

    def check_generic(self, exponents: Iterable[Exponent], context: str = "") -> None:
        """
        Raises:
            ValueError: If some exponent pairs to zero with the chamber.
        """
        for u in exponents:
            if len(u) != self.rank:
                raise ValueError(f"Exponent {u} does not match the chamber rank {self.rank}")
            if self.pairing(u) == 0:
                where = f" ({context})" if context else ""
                raise ValueError(f"Chamber {[str(c) for c in self.xi]} is not generic: "
                                 f"it is orthogonal to {[str(c) for c in u]}{where}")


class ChamberSeries:
    """
    A power series expansion in a chamber, truncated one-sidedly to
    `⟨xi, exponent⟩ ≤ cutoff`.

    Attributes:
        chamber: The chamber of the expansion.
        cutoff: The truncation level.
        terms: The retained terms.
    """

    __slots__ = ("_chamber", "_cutoff", "_terms")

    def __init__(self, chamber: Chamber, cutoff: RationalLike,
                 terms: GradedLaurentPoly) -> None:
        cutoff = parse_rational(cutoff)
        if terms.rank != chamber.rank:
            raise ValueError(f"Rank mismatch: {terms.rank} != {chamber.rank}")
        self._chamber = chamber
        self._cutoff = cutoff
        self._terms = terms.select(lambda key: chamber.pairing(key[0]) <= cutoff)

    @property
    def chamber(self) -> Chamber:
        return self._chamber

    @property
    def cutoff(self) -> Fraction:
        return self._cutoff

    @property
    def terms(self) -> GradedLaurentPoly:
        return self._terms

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ChamberSeries):
            return NotImplemented
        return (self._chamber == other._chamber and self._cutoff == other._cutoff
                and self._terms == other._terms)

    def __hash__(self) -> int:
        return hash((self._chamber, self._cutoff, self._terms))

    def __repr__(self) -> str:
        return f"ChamberSeries(cutoff={self._cutoff}, terms={format_poly(self._terms)!r})"

    def _check_chamber(self, other: "ChamberSeries") -> None:
        if self._chamber != other._chamber:
            raise ValueError("Series expanded in different chambers cannot be combined")

    def _lowest_level(self) -> Fraction:
        return min((self._chamber.pairing(e) for e in self._terms.exponents()),
                   default=Fraction(0))

    def __add__(self, other: "ChamberSeries") -> "ChamberSeries":
        self._check_chamber(other)
        return ChamberSeries(self._chamber, min(self._cutoff, other._cutoff),
                             self._terms + other._terms)

    def __mul__(self, other: "ChamberSeries") -> "ChamberSeries":
        self._check_chamber(other)
        # Exact only up to the level both truncations still determine.
        cutoff = min(self._cutoff, other._cutoff,
                     self._cutoff + other._lowest_level(),
                     other._cutoff + self._lowest_level())
        return ChamberSeries(self._chamber, cutoff, self._terms * other._terms)

    def multiply_poly(self, p: GradedLaurentPoly) -> "ChamberSeries":
        lowest = min((self._chamber.pairing(e) for e in p.exponents()), default=Fraction(0))
        return ChamberSeries(self._chamber, self._cutoff + min(lowest, Fraction(0)),
                             self._terms * p)

    def coefficient(self, exponent: Exponent, deg_b: int = 0, deg_y: int = 0) -> Scalar:
        if self._chamber.pairing(exponent) > self._cutoff:
            raise ValueError(f"Exponent {exponent} lies beyond the cutoff {self._cutoff}")
        return self._terms.coefficient(exponent, deg_b, deg_y)

    def window(self, lower: RationalLike, upper: RationalLike) -> GradedLaurentPoly:
        """The terms with `lower ≤ ⟨xi, exponent⟩ ≤ upper`."""
        lower, upper = parse_rational(lower), parse_rational(upper)
        return self._terms.select(lambda key: lower <= self._chamber.pairing(key[0]) <= upper)


def geometric_truncation(step: Exponent, repeats: int) -> GradedLaurentPoly:
    """The polynomial `Σ_{k=0}^{repeats} λ^{k·step}`."""
    return GradedLaurentPoly.from_flat(
        len(step), {(exp_scale(step, k), 0, 0): 1 for k in range(repeats + 1)})


def chamber_expand(f: CharFraction, c: Chamber, T: RationalLike) -> ChamberSeries:
    """
    Expands a fraction as a power series in the chamber `c`.

    A factor with `⟨xi, u⟩ > 0` expands as `Σ_k λ^{ku}`; a factor with
    `⟨xi, u⟩ < 0` is first rewritten as `-λ^{-u} / (1 - λ^{-u})`. The product
    with the numerator is truncated to `⟨xi, ·⟩ ≤ T`.

    Args:
        f: The fraction to expand.
        c: The chamber.
        T: The cutoff.
    Returns:
        ChamberSeries: The truncated expansion.
    Raises:
        ValueError: If the chamber is orthogonal to a denominator exponent.
    """
    T = parse_rational(T)
    c.check_generic(f.denominator, "denominator of the expanded fraction")
    current = f.numerator
    steps: list[Exponent] = []
    for u in f.denominator:
        if c.pairing(u) > 0:
            steps.append(u)
            continue
        flipped = exp_neg(u)
        current = current.shift(flipped).scale(-1)
        steps.append(flipped)

    def truncate(p: GradedLaurentPoly) -> GradedLaurentPoly:
        return p.select(lambda key: c.pairing(key[0]) <= T)

    # Every remaining step only raises the level, so truncating early is exact.
    current = truncate(current)
    for step in steps:
        if not current:
            break
        lowest = min(c.pairing(exponent) for exponent in current.exponents())
        repeats = math.floor((T - lowest) / c.pairing(step))
        current = truncate(current * geometric_truncation(step, repeats))
    logger.debug(f"Chamber expansion to cutoff {T} produced {len(current)} terms")
    return ChamberSeries(c, T, current)
