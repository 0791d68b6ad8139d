"""
Exact scalar, exponent and graded Laurent polynomial arithmetic.

Every other module builds on the three value types defined here:

* `Scalar`, a Gaussian rational `re + i*im`, an element of sympy's `QQ_I`.
* `Exponent`, a tuple of `Fraction` coordinates naming the torus character
  `λ^v`.
* `GradedLaurentPoly`, a sparse Laurent polynomial in the torus variables
  whose coefficients are polynomials in the formal variables `b` and `y`.

Laurent polynomials with rational exponents are stored as polynomials in the
sympy ring `QQ_I[b, y, t1, ..., tr]` together with a common exponent
denominator `D` and a monomial shift `s`: the ring monomial `t^m` stands for
`λ^{(m + s)/D}`. All values are immutable and no floating point arithmetic is
used.
"""
import functools
import logging
import math
import re
from collections.abc import Callable, Iterable, Iterator, Mapping
from fractions import Fraction
from types import MappingProxyType
from typing import Any, Union

import sympy as sp
from sympy import QQ, QQ_I
from sympy.polys.orderings import lex
from sympy.polys.polyerrors import CoercionFailed, ExactQuotientFailed
from sympy.polys.rings import PolyElement, PolyRing, ring

logger = logging.getLogger(__name__)

Exponent = tuple[Fraction, ...]
RationalLike = Union[int, str, Fraction]
ScalarLike = Union[int, Fraction, "Scalar"]

SCALAR_RE = re.compile(
    r"^(?P<re>[+-]?\d+(?:/\d+)?)?"
    r"(?:(?P<im_sign>[+-])?i(?P<im>\d+(?:/\d+)?)?)?$"
)
DEFAULT_VARIABLES: dict[int, tuple[str, ...]] = {
    1: ("λ",),
    2: ("λ", "μ"),
    3: ("λ", "μ", "ν"),
}
# Generators b and y come first in every Laurent ring
GRADING = 2


def parse_rational(value: RationalLike) -> Fraction:
    """
    Parses an exact rational given as an int, a `Fraction` or a string of the
    form `p` or `p/q`.

    Args:
        value: The value to parse.
    Returns:
        Fraction: The exact rational.
    Raises:
        ValueError: If the value is a float or a string that is not a rational.
    """
    if isinstance(value, float):
        raise ValueError(f"Floating point values are not exact rationals: {value}")
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError) as error:
        raise ValueError(f"Cannot parse an exact rational from: {value!r}") from error


def format_rational(value: Fraction) -> str:
    return str(value)


def _qq(value: RationalLike) -> Any:
    rational = parse_rational(value)
    return QQ(rational.numerator, rational.denominator)


def _fraction(value: Any) -> Fraction:
    return Fraction(int(value.numerator), int(value.denominator))


class Scalar:
    """
    A Gaussian rational `re + i*im`. The value is held as an element of the
    sympy domain `QQ_I` and all arithmetic is done there.

    Attributes:
        re: The real part.
        im: The imaginary part.
        element: The underlying `QQ_I` element.
    """

    __slots__ = ("_value",)

    def __init__(self, re: RationalLike = 0, im: RationalLike = 0) -> None:
        self._value = QQ_I(_qq(re), _qq(im))

    @classmethod
    def of(cls, element: Any) -> "Scalar":
        """Wraps a `QQ_I` element (or anything `QQ_I` converts)."""
        element = QQ_I.convert(element)
        scalar = cls.__new__(cls)
        # Re-converting the parts keeps both of them in QQ
        scalar._value = QQ_I(QQ.convert(element.x), QQ.convert(element.y))
        return scalar

    @classmethod
    def from_sympy(cls, expr: sp.Expr) -> "Scalar":
        """
        Raises:
            ValueError: If the expression is not a Gaussian rational.
        """
        try:
            return cls.of(QQ_I.from_sympy(sp.expand(expr)))
        except CoercionFailed as error:
            raise ValueError(f"{expr} is not a Gaussian rational") from error

    @classmethod
    def parse(cls, text: str | int) -> "Scalar":
        """
        Parses the text form `a`, `a+ib`, `a-ib`, `ib`, `i` or `-i` where `a`
        and `b` are rationals written as `p` or `p/q`.

        Args:
            text: The text to parse, an int is accepted as a real value.
        Returns:
            Scalar: The parsed value.
        Raises:
            ValueError: If the text does not match the scalar format.
        """
        if isinstance(text, int):
            return cls(text)
        compact = text.replace(" ", "")
        match = SCALAR_RE.match(compact)
        if not compact or match is None:
            raise ValueError(f"Cannot parse a Gaussian rational from: {text!r}")
        real = Fraction(match.group("re")) if match.group("re") else Fraction(0)
        imaginary = Fraction(0)
        if "i" in compact:
            imaginary = Fraction(match.group("im")) if match.group("im") else Fraction(1)
            if match.group("im_sign") == "-":
                imaginary = -imaginary
            elif match.group("im_sign") is None and match.group("re") is not None:
                raise ValueError(f"Missing sign before the imaginary part in: {text!r}")
        return cls(real, imaginary)

    @property
    def re(self) -> Fraction:
        return _fraction(self._value.x)

    @property
    def im(self) -> Fraction:
        return _fraction(self._value.y)

    @property
    def element(self) -> Any:
        return self._value

    def to_sympy(self) -> sp.Expr:
        return QQ_I.to_sympy(self._value)

    def __str__(self) -> str:
        real, imaginary = self.re, self.im
        if imaginary == 0:
            return format_rational(real)
        magnitude = abs(imaginary)
        text = "i" if magnitude == 1 else f"i{format_rational(magnitude)}"
        sign = "-" if imaginary < 0 else "+"
        if real == 0:
            return text if sign == "+" else f"-{text}"
        return f"{format_rational(real)}{sign}{text}"

    def __repr__(self) -> str:
        return f"Scalar({self})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Scalar):
            return NotImplemented
        return self._value == other._value

    def __hash__(self) -> int:
        return hash((self.re, self.im))

    def __bool__(self) -> bool:
        return bool(self._value)

    def __add__(self, other: ScalarLike) -> "Scalar":
        return Scalar.of(self._value + as_scalar(other)._value)

    __radd__ = __add__

    def __neg__(self) -> "Scalar":
        return Scalar.of(-self._value)

    def __sub__(self, other: ScalarLike) -> "Scalar":
        return Scalar.of(self._value - as_scalar(other)._value)

    def __rsub__(self, other: ScalarLike) -> "Scalar":
        return Scalar.of(as_scalar(other)._value - self._value)

    def __mul__(self, other: ScalarLike) -> "Scalar":
        return Scalar.of(self._value * as_scalar(other)._value)

    __rmul__ = __mul__

    def __truediv__(self, other: ScalarLike) -> "Scalar":
        divisor = as_scalar(other)
        if not divisor:
            raise ZeroDivisionError("Division by the zero Gaussian rational")
        return Scalar.of(self._value / divisor._value)

    def __pow__(self, exponent: int) -> "Scalar":
        if exponent == 0:
            return Scalar(1)
        if exponent < 0 and not self:
            raise ZeroDivisionError("Negative power of the zero Gaussian rational")
        return Scalar.of(self._value ** exponent)

    def conjugate(self) -> "Scalar":
        return Scalar.of(QQ_I(self._value.x, -self._value.y))

    def is_real(self) -> bool:
        return not self._value.y

    def is_nonnegative_integer(self) -> bool:
        real = self.re
        return self.is_real() and real.denominator == 1 and real >= 0


def as_scalar(value: ScalarLike) -> Scalar:
    if isinstance(value, Scalar):
        return value
    if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
        return Scalar(value)
    raise TypeError(f"Cannot convert {type(value).__name__} to a Scalar: {value!r}")


ZERO = Scalar()
ONE = Scalar(1)
I = Scalar(0, 1)


def make_exponent(coords: Iterable[RationalLike]) -> Exponent:
    return tuple(parse_rational(coord) for coord in coords)


def zero_exponent(rank: int) -> Exponent:
    return tuple(Fraction(0) for _ in range(rank))


def exp_add(u: Exponent, v: Exponent) -> Exponent:
    if len(u) != len(v):
        raise ValueError(f"Exponent length mismatch: {len(u)} != {len(v)}")
    return tuple(a + b for a, b in zip(u, v))


def exp_neg(u: Exponent) -> Exponent:
    return tuple(-a for a in u)


def exp_sub(u: Exponent, v: Exponent) -> Exponent:
    return exp_add(u, exp_neg(v))


def exp_scale(u: Exponent, factor: RationalLike) -> Exponent:
    factor = parse_rational(factor)
    return tuple(a * factor for a in u)


def pairing(xi: Iterable[Fraction], v: Exponent) -> Fraction:
    """
    The pairing `⟨xi, v⟩` of a chamber (or weight assignment) with an exponent.
    """
    total = Fraction(0)
    for a, b in zip(xi, v, strict=True):
        total += a * b
    return total


def is_canonical_orientation(u: Exponent) -> bool:
    """
    True if the first nonzero coordinate of `u` is positive.

    Raises:
        ValueError: If `u` is the zero exponent.
    """
    for coord in u:
        if coord != 0:
            return coord > 0
    raise ValueError(f"The zero exponent has no orientation: {u}")


def exponent_denominators(u: Exponent) -> set[int]:
    return {coord.denominator for coord in u}



@functools.cache
def grading_ring() -> PolyRing:
    """The ring `QQ_I[b, y]` of grading coefficients."""
    return ring(["b", "y"], QQ_I, lex)[0]


@functools.cache
def laurent_ring(rank: int) -> PolyRing:
    """The ring `QQ_I[b, y, t1, ..., t_rank]` with lex order."""
    symbols = ["b", "y"] + [f"t{index}" for index in range(1, rank + 1)]
    return ring(symbols, QQ_I, lex)[0]


def _check_degrees(deg_b: int, deg_y: int) -> None:
    if deg_b < 0 or deg_y < 0:
        raise ValueError(f"Grading degrees must be nonnegative: ({deg_b}, {deg_y})")


class GradedCoeff:
    """
    A polynomial in the formal variables `b` and `y` over the Gaussian
    rationals, an element of `QQ_I[b, y]`.
    """

    __slots__ = ("_poly",)

    def __init__(self, terms: Mapping[tuple[int, int], ScalarLike] | None = None) -> None:
        for deg_b, deg_y in (terms or {}):
            _check_degrees(deg_b, deg_y)
        self._poly: PolyElement = grading_ring().from_dict(
            {key: as_scalar(value).element for key, value in (terms or {}).items()})

    @classmethod
    def _of(cls, poly: PolyElement) -> "GradedCoeff":
        coeff = cls.__new__(cls)
        coeff._poly = poly
        return coeff

    @property
    def terms(self) -> Mapping[tuple[int, int], Scalar]:
        return MappingProxyType({monom: Scalar.of(value) for monom, value in self._poly.iterterms()})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GradedCoeff):
            return NotImplemented
        return self._poly == other._poly

    def __hash__(self) -> int:
        return hash(self._poly)

    def __repr__(self) -> str:
        return f"GradedCoeff({self._poly})"

    def __bool__(self) -> bool:
        return bool(self._poly)

    def __add__(self, other: "GradedCoeff") -> "GradedCoeff":
        return GradedCoeff._of(self._poly + other._poly)

    def __neg__(self) -> "GradedCoeff":
        return GradedCoeff._of(-self._poly)

    def __sub__(self, other: "GradedCoeff") -> "GradedCoeff":
        return GradedCoeff._of(self._poly - other._poly)

    def __mul__(self, other: "GradedCoeff") -> "GradedCoeff":
        return GradedCoeff._of(self._poly * other._poly)

    def evaluate(self, b_val: ScalarLike, y_val: ScalarLike) -> Scalar:
        return Scalar.of(self._poly(as_scalar(b_val).element, as_scalar(y_val).element))


FlatKey = tuple[Exponent, int, int]


class GradedLaurentPoly:
    """
    A sparse Laurent polynomial in `rank` torus variables with `GradedCoeff`
    coefficients.

    The polynomial is kept in normal form: the ring polynomial has no monomial
    factor in the torus generators and `D` is the least common denominator
    of the exponents, so equal values have equal representations. The `flat`
    view `(exponent, deg_b, deg_y) -> Scalar` is decoded on demand.

    Attributes:
        rank: The number of torus variables.
    """

    __slots__ = ("_rank", "_denom", "_shift", "_poly", "_decoded")

    def __init__(self, rank: int,
                 terms: Mapping[Exponent, GradedCoeff] | None = None) -> None:
        flat: dict[FlatKey, Scalar] = {}
        for exponent, coeff in (terms or {}).items():
            for (deg_b, deg_y), value in coeff.terms.items():
                flat[(exponent, deg_b, deg_y)] = value
        self._encode(rank, flat)

    @classmethod
    def from_flat(cls, rank: int, flat: Mapping[FlatKey, ScalarLike]) -> "GradedLaurentPoly":
        poly = cls.__new__(cls)
        poly._encode(rank, flat)
        return poly

    @classmethod
    def _build(cls, rank: int, denom: int, shift: tuple[int, ...],
               poly: PolyElement) -> "GradedLaurentPoly":
        result = cls.__new__(cls)
        result._assign(rank, denom, shift, poly)
        return result

    def _encode(self, rank: int, flat: Mapping[FlatKey, ScalarLike]) -> None:
        if rank < 1:
            raise ValueError(f"The torus rank must be at least 1, got: {rank}")
        cleaned: dict[FlatKey, Scalar] = {}
        for (exponent, deg_b, deg_y), value in flat.items():
            if len(exponent) != rank:
                raise ValueError(f"Exponent {exponent} does not have length equal to the rank {rank}")
            _check_degrees(deg_b, deg_y)
            cleaned[(tuple(Fraction(c) for c in exponent), deg_b, deg_y)] = as_scalar(value)
        denom = math.lcm(1, *(c.denominator for exponent, _, _ in cleaned for c in exponent))
        scaled = {(tuple(int(c * denom) for c in exponent), deg_b, deg_y): value
                  for (exponent, deg_b, deg_y), value in cleaned.items()}
        shift = tuple(min((exponent[i] for exponent, _, _ in scaled), default=0) for i in range(rank))
        poly = laurent_ring(rank).from_dict(
            {(deg_b, deg_y, *(n - s for n, s in zip(exponent, shift))): value.element
             for (exponent, deg_b, deg_y), value in scaled.items()})
        self._assign(rank, denom, shift, poly)

    def _assign(self, rank: int, denom: int, shift: tuple[int, ...], poly: PolyElement) -> None:
        if not poly:
            denom, shift = 1, (0,) * rank
        else:
            monoms = list(poly.itermonoms())
            low = tuple(min(m[GRADING + i] for m in monoms) for i in range(rank))
            shift = tuple(s + l for s, l in zip(shift, low))
            common = math.gcd(denom, *shift,
                              *(m[GRADING + i] - low[i] for m in monoms for i in range(rank)))
            if any(low) or common != 1:
                poly = poly.ring.from_dict({
                    m[:GRADING] + tuple((m[GRADING + i] - low[i]) // common for i in range(rank)): value
                    for m, value in poly.iterterms()})
                denom //= common
                shift = tuple(s // common for s in shift)
        self._rank = rank
        self._denom = denom
        self._shift = shift
        self._poly = poly
        self._decoded: dict[FlatKey, Scalar] | None = None

    def _lift(self, denom: int) -> tuple[tuple[int, ...], PolyElement]:
        """Shift and ring polynomial over the finer exponent denominator `denom`."""
        factor = denom // self._denom
        if factor == 1:
            return self._shift, self._poly
        return (tuple(s * factor for s in self._shift),
                self._poly.inflate((1,) * GRADING + (factor,) * self._rank))

    def _aligned(self, other: "GradedLaurentPoly") -> tuple[int, tuple[int, ...], PolyElement, PolyElement]:
        self._check_rank(other)
        denom = math.lcm(self._denom, other._denom)
        first_shift, first = self._lift(denom)
        second_shift, second = other._lift(denom)
        shift = tuple(map(min, first_shift, second_shift))
        first = first.mul_monom((0,) * GRADING + tuple(a - c for a, c in zip(first_shift, shift)))
        second = second.mul_monom((0,) * GRADING + tuple(a - c for a, c in zip(second_shift, shift)))
        return denom, shift, first, second

    @classmethod
    def zero(cls, rank: int) -> "GradedLaurentPoly":
        return cls.from_flat(rank, {})

    @classmethod
    def monomial(cls, exponent: Exponent, coeff: ScalarLike = 1,
                 deg_b: int = 0, deg_y: int = 0) -> "GradedLaurentPoly":
        return cls.from_flat(len(exponent), {(exponent, deg_b, deg_y): coeff})

    @classmethod
    def constant(cls, rank: int, coeff: ScalarLike = 1,
                 deg_b: int = 0, deg_y: int = 0) -> "GradedLaurentPoly":
        return cls.monomial(zero_exponent(rank), coeff, deg_b, deg_y)

    @property
    def rank(self) -> int:
        return self._rank

    @property
    def terms(self) -> Mapping[Exponent, GradedCoeff]:
        nested: dict[Exponent, dict[tuple[int, int], Scalar]] = {}
        for (exponent, deg_b, deg_y), value in self.flat().items():
            nested.setdefault(exponent, {})[(deg_b, deg_y)] = value
        return MappingProxyType({exponent: GradedCoeff(coeff)
                                 for exponent, coeff in nested.items()})

    def flat(self) -> Mapping[FlatKey, Scalar]:
        """Read-only flat view, unordered."""
        if self._decoded is None:
            self._decoded = {
                (tuple(Fraction(m[GRADING + i] + self._shift[i], self._denom) for i in range(self._rank)),
                 m[0], m[1]): Scalar.of(value)
                for m, value in self._poly.iterterms()}
        return MappingProxyType(self._decoded)

    def items(self) -> Iterator[tuple[FlatKey, Scalar]]:
        """Flat `((exponent, deg_b, deg_y), coefficient)` pairs in sorted order."""
        flat = self.flat()
        for key in sorted(flat, key=_flat_sort_key):
            yield key, flat[key]

    def coefficient(self, exponent: Exponent, deg_b: int = 0, deg_y: int = 0) -> Scalar:
        return self.flat().get((tuple(exponent), deg_b, deg_y), ZERO)

    def exponents(self) -> set[Exponent]:
        return {exponent for exponent, _, _ in self.flat()}

    def select(self, keep: Callable[[FlatKey], bool]) -> "GradedLaurentPoly":
        """The polynomial made of the terms whose key satisfies `keep`."""
        return GradedLaurentPoly.from_flat(
            self._rank, {key: value for key, value in self.flat().items() if keep(key)})

    def __len__(self) -> int:
        return len(self._poly)

    def __bool__(self) -> bool:
        return bool(self._poly)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GradedLaurentPoly):
            return NotImplemented
        return (self._rank == other._rank and self._denom == other._denom
                and self._shift == other._shift and self._poly == other._poly)

    def __hash__(self) -> int:
        return hash((self._rank, self._denom, self._shift, self._poly))

    def __repr__(self) -> str:
        return f"GradedLaurentPoly({format_poly(self)!r})"

    def _check_rank(self, other: "GradedLaurentPoly") -> None:
        if self._rank != other._rank:
            raise ValueError(f"Rank mismatch: {self._rank} != {other._rank}")

    def __add__(self, other: "GradedLaurentPoly") -> "GradedLaurentPoly":
        denom, shift, first, second = self._aligned(other)
        return GradedLaurentPoly._build(self._rank, denom, shift, first + second)

    def __neg__(self) -> "GradedLaurentPoly":
        return GradedLaurentPoly._build(self._rank, self._denom, self._shift, -self._poly)

    def __sub__(self, other: "GradedLaurentPoly") -> "GradedLaurentPoly":
        denom, shift, first, second = self._aligned(other)
        return GradedLaurentPoly._build(self._rank, denom, shift, first - second)

    def __mul__(self, other: "GradedLaurentPoly") -> "GradedLaurentPoly":
        self._check_rank(other)
        denom = math.lcm(self._denom, other._denom)
        first_shift, first = self._lift(denom)
        second_shift, second = other._lift(denom)
        return GradedLaurentPoly._build(self._rank, denom,
                                        tuple(map(sum, zip(first_shift, second_shift))),
                                        first * second)

    def scale(self, factor: ScalarLike) -> "GradedLaurentPoly":
        return GradedLaurentPoly._build(self._rank, self._denom, self._shift,
                                        self._poly.mul_ground(as_scalar(factor).element))

    def shift(self, exponent: Exponent, deg_b: int = 0, deg_y: int = 0) -> "GradedLaurentPoly":
        """Multiplies by the monomial `b^deg_b y^deg_y λ^exponent`."""
        if len(exponent) != self._rank:
            raise ValueError(f"Rank mismatch: {self._rank} != {len(exponent)}")
        _check_degrees(deg_b, deg_y)
        denom = math.lcm(self._denom, *(Fraction(c).denominator for c in exponent))
        shift, poly = self._lift(denom)
        return GradedLaurentPoly._build(
            self._rank, denom,
            tuple(s + int(Fraction(c) * denom) for s, c in zip(shift, exponent)),
            poly.mul_monom((deg_b, deg_y) + (0,) * self._rank))

    def exact_quotient(self, divisor: "GradedLaurentPoly") -> "GradedLaurentPoly | None":
        """
        Exact division in the Laurent ring.

        Both normal forms are free of monomial factors in the torus
        generators, so Laurent divisibility is ring divisibility of the
        lifted polynomials.

        Returns:
            GradedLaurentPoly | None: The quotient, or None when `divisor`
                does not divide `self`.
        Raises:
            ZeroDivisionError: If the divisor is zero.
        """
        self._check_rank(divisor)
        if not divisor:
            raise ZeroDivisionError("Division by the zero Laurent polynomial")
        if not self:
            return self
        denom = math.lcm(self._denom, divisor._denom)
        dividend_shift, dividend = self._lift(denom)
        divisor_shift, lifted = divisor._lift(denom)
        try:
            quotient = dividend.exquo(lifted)
        except ExactQuotientFailed:
            return None
        return GradedLaurentPoly._build(self._rank, denom,
                                        tuple(a - c for a, c in zip(dividend_shift, divisor_shift)),
                                        quotient)

    def inverted(self) -> "GradedLaurentPoly":
        """Substitutes `λ ↦ λ⁻¹` in every torus variable."""
        if not self._poly:
            return self
        monoms = list(self._poly.itermonoms())
        high = tuple(max(m[GRADING + i] for m in monoms) for i in range(self._rank))
        poly = self._poly.ring.from_dict({
            m[:GRADING] + tuple(high[i] - m[GRADING + i] for i in range(self._rank)): value
            for m, value in self._poly.iterterms()})
        return GradedLaurentPoly._build(self._rank, self._denom,
                                        tuple(-(h + s) for h, s in zip(high, self._shift)), poly)

    def substitute_grading(self, b_val: ScalarLike | None,
                           y_val: ScalarLike | None = None) -> "GradedLaurentPoly":
        """Substitutes values for `b` and `y`, a variable given None is kept."""
        b_gen, y_gen = laurent_ring(self._rank).gens[:GRADING]
        poly = self._poly
        if b_val is not None:
            poly = poly.subs(b_gen, as_scalar(b_val).element)
        if y_val is not None:
            poly = poly.subs(y_gen, as_scalar(y_val).element)
        return GradedLaurentPoly._build(self._rank, self._denom, self._shift, poly)

    def b_part(self, deg_b: int) -> "GradedLaurentPoly":
        """The b-free coefficient of `b^deg_b` (y grading kept)."""
        return GradedLaurentPoly._build(self._rank, self._denom, self._shift,
                                        self._poly.coeff_wrt(0, deg_b))

    def split_by_b(self) -> dict[int, "GradedLaurentPoly"]:
        return {deg_b: self.b_part(deg_b) for deg_b in sorted({m[0] for m in self._poly.itermonoms()})}

    def max_b_degree(self) -> int:
        return max((m[0] for m in self._poly.itermonoms()), default=0)

    def max_y_degree(self) -> int:
        return max((m[1] for m in self._poly.itermonoms()), default=0)

    def has_trivial_grading(self) -> bool:
        return all(m[0] == 0 and m[1] == 0 for m in self._poly.itermonoms())

    def as_monomial(self) -> tuple[Exponent, Scalar] | None:
        """Returns `(v, c)` when the polynomial is a single ungraded term `c·λ^v`."""
        if len(self._poly) != 1:
            return None
        (exponent, deg_b, deg_y), value = next(iter(self.flat().items()))
        if deg_b or deg_y:
            return None
        return exponent, value


def _flat_sort_key(key: FlatKey) -> tuple[int, int, Exponent]:
    exponent, deg_b, deg_y = key
    return (deg_b, deg_y, exponent)


def poly_add(p: GradedLaurentPoly, q: GradedLaurentPoly) -> GradedLaurentPoly:
    """
    Exact sum of two graded Laurent polynomials.

    Raises:
        ValueError: If the ranks differ.
    """
    return p + q


def poly_mul(p: GradedLaurentPoly, q: GradedLaurentPoly) -> GradedLaurentPoly:
    """
    Exact product of two graded Laurent polynomials; `b` and `y` degrees add.

    Raises:
        ValueError: If the ranks differ.
    """
    return p * q


def invert_variables(p: GradedLaurentPoly) -> GradedLaurentPoly:
    """
    Substitutes `λ ↦ λ⁻¹` in every torus variable, leaving the `b`, `y`
    grading untouched.
    """
    return p.inverted()


def eval_grading(p: GradedLaurentPoly, b_val: ScalarLike,
                 y_val: ScalarLike | None = None) -> GradedLaurentPoly:
    """
    Substitutes values for the formal variables `b` and `y`.

    Args:
        p: The graded polynomial.
        b_val: The value substituted for `b`.
        y_val: The value substituted for `y`. If None the `y` grading is kept.
    Returns:
        GradedLaurentPoly: The evaluated polynomial. Its grading is trivial
            when `y_val` is given.
    """
    return p.substitute_grading(b_val, y_val)


def variable_names(rank: int) -> tuple[str, ...]:
    if rank in DEFAULT_VARIABLES:
        return DEFAULT_VARIABLES[rank]
    return tuple(f"λ{index}" for index in range(1, rank + 1))


def format_monomial(exponent: Exponent, deg_b: int = 0, deg_y: int = 0,
                    variables: tuple[str, ...] | None = None) -> str:
    """
    Renders `b^deg_b y^deg_y λ^exponent` as `b^2*y*λ^5*μ^-1`; the empty
    monomial renders as the empty string.
    """
    names = variables or variable_names(len(exponent))
    factors: list[str] = []
    for name, degree in (("b", deg_b), ("y", deg_y)):
        if degree == 1:
            factors.append(name)
        elif degree > 1:
            factors.append(f"{name}^{degree}")
    for name, coord in zip(names, exponent, strict=True):
        if coord == 0:
            continue
        if coord == 1:
            factors.append(name)
        elif coord.denominator == 1:
            factors.append(f"{name}^{coord.numerator}")
        else:
            factors.append(f"{name}^({coord})")
    return "*".join(factors)


def format_term(value: Scalar, monomial: str) -> str:
    if not monomial:
        return str(value)
    if value == ONE:
        return monomial
    if value == -ONE:
        return f"-{monomial}"
    text = str(value)
    if value.re != 0 and value.im != 0:
        text = f"({text})"
    return f"{text}*{monomial}"


def format_poly(p: GradedLaurentPoly, variables: tuple[str, ...] | None = None) -> str:
    """
    Deterministic text form of a graded Laurent polynomial, terms sorted by
    (b degree, y degree, exponent), e.g. `1 + b^2*λ^5*μ^-1`.
    """
    rendered = [format_term(value, format_monomial(exponent, deg_b, deg_y, variables))
                for (exponent, deg_b, deg_y), value in p.items()]
    if not rendered:
        return "0"
    text = rendered[0]
    for term in rendered[1:]:
        if term.startswith("-"):
            text += f" - {term[1:]}"
        else:
            text += f" + {term}"
    return text
