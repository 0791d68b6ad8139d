"""
Laurent expansion of character fractions in a single angle `t` under
`λ_j ↦ exp(i w_j t)`. The `t⁻²` coefficient of a local equivariant signature
character is the NUT charge `N` and the `t⁰` coefficient is `τ₃`.
"""
import logging
from collections.abc import Iterable, Sequence
from fractions import Fraction

import sympy as sp
from pydantic import BaseModel, ConfigDict, Field

from equivariant_morse.algebra import (
    GradedLaurentPoly,
    RationalLike,
    Scalar,
    pairing,
    parse_rational,
)
from equivariant_morse.charfrac import (
    CharFraction,
    canonicalize,
    frac_eval_grading,
    frac_mul,
)
from equivariant_morse.localization import FixedPoint, FixedPointProblem

logger = logging.getLogger(__name__)

T = sp.Symbol("t")
DEFAULT_ORDER = 4


class ThetaSeries(BaseModel):
    """
    A truncated Laurent series in `t` with Gaussian rational coefficients.

    Attributes:
        min_order: Lowest order that may carry a coefficient.
        coefficients: Nonzero coefficients by order.
        order: Truncation order `K`, coefficients above it are unknown.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    min_order: int
    coefficients: dict[int, Scalar] = Field(default_factory=dict)
    order: int = DEFAULT_ORDER

    def coefficient(self, k: int) -> Scalar:
        if k > self.order:
            raise ValueError(f"Order {k} lies above the truncation order {self.order}")
        return self.coefficients.get(k, Scalar())

    def __add__(self, other: "ThetaSeries") -> "ThetaSeries":
        order = min(self.order, other.order)
        total: dict[int, Scalar] = {}
        for series in (self, other):
            for k, value in series.coefficients.items():
                if k <= order:
                    total[k] = total.get(k, Scalar()) + value
        return ThetaSeries(min_order=min(self.min_order, other.min_order),
                           coefficients={k: v for k, v in sorted(total.items()) if v},
                           order=order)

    def is_real(self) -> bool:
        return all(value.is_real() for value in self.coefficients.values())

    def odd_orders_zero(self) -> bool:
        return all(k % 2 == 0 for k in self.coefficients)

    def negative_orders_zero(self) -> bool:
        return all(k >= 0 for k in self.coefficients)


class ThetaReport(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    per_point: dict[str, tuple[Scalar, Scalar]]
    sum_N: Scalar
    sum_tau3: Scalar
    total: ThetaSeries
    sum_n_zero: bool
    odd_orders_zero: bool
    negative_orders_zero: bool
    signature: Scalar | None = None
    signature_matches: bool | None = None


def parse_weights(values: Iterable[RationalLike]) -> tuple[Fraction, ...]:
    return tuple(parse_rational(value) for value in values)


def _to_scalar(value: sp.Expr) -> Scalar:
    try:
        return Scalar.from_sympy(value)
    except ValueError as error:
        raise ValueError(f"Series coefficient {value} is not a Gaussian rational") from error


def _character(exponent_weight: Fraction) -> sp.Expr:
    return sp.exp(sp.I * sp.Rational(exponent_weight.numerator, exponent_weight.denominator) * T)


def theta_expand(f: CharFraction, w: Sequence[Fraction], K: int = DEFAULT_ORDER) -> ThetaSeries:
    """
    Expands `f(exp(i w t))` as a Laurent series in `t` up to order `K`.

    Args:
        f: A fraction whose b and y grading has been evaluated.
        w: The weight assignment, one rational per torus variable.
        K: Truncation order.
    Returns:
        ThetaSeries: The series, with `min_order = -#denominator`.
    Raises:
        ValueError: If `f` still carries a grading, the weight assignment has
            the wrong length, or `⟨w, u⟩ = 0` for a denominator factor `u`.
    """
    if len(w) != f.rank:
        raise ValueError(f"Weight assignment has {len(w)} entries, expected {f.rank}")
    if not f.numerator.has_trivial_grading():
        raise ValueError("Evaluate the b and y grading before the θ expansion")
    numerator = sp.Integer(0)
    for (exponent, _, _), value in f.numerator.items():
        numerator += value.to_sympy() * _character(pairing(w, exponent))
    denominator = sp.Integer(1)
    for u in f.denominator:
        level = pairing(w, u)
        if level == 0:
            raise ValueError(f"Weight assignment {[str(c) for c in w]} is orthogonal to the "
                             f"denominator factor {[str(c) for c in u]}")
        denominator *= 1 - _character(level)
    min_order = -len(f.denominator)
    expansion = sp.expand(sp.series(numerator / denominator, T, 0, K + 1).removeO())
    coefficients: dict[int, Scalar] = {}
    for k in range(min_order, K + 1):
        value = _to_scalar(expansion.coeff(T, k))
        if value:
            coefficients[k] = value
    return ThetaSeries(min_order=min_order, coefficients=coefficients, order=K)


def nut_and_tau3(f: CharFraction, w: Sequence[Fraction]) -> tuple[Scalar, Scalar]:
    """
    The NUT charge (the `t⁻²` coefficient) and `τ₃` (the `t⁰` coefficient) of
    a local equivariant signature character.

    Raises:
        ValueError: If either coefficient has an imaginary part.
    """
    return _nut_and_tau3(theta_expand(f, w, 0))


def _nut_and_tau3(series: ThetaSeries) -> tuple[Scalar, Scalar]:
    nut, tau3 = series.coefficient(-2), series.coefficient(0)
    if not (nut.is_real() and tau3.is_real()):
        raise ValueError(f"NUT charge {nut} or τ₃ {tau3} is not real, the input is not a "
                         "signature character")
    return nut, tau3


def local_chi1(fp: FixedPoint, rank: int) -> CharFraction:
    """
    Local equivariant signature character: the explicit `chi1` data at
    `b = -1, y = 1`, or `∏ (1 + λ^γ)/(1 - λ^γ)` over the weights.
    """
    if fp.chi1 is not None:
        return canonicalize(frac_eval_grading(fp.chi1, -1, 1))
    if not fp.weights:
        raise ValueError(f"Fixed point {fp.name} has neither weights nor a signature character")
    product = CharFraction.one(rank)
    for gamma in fp.weights:
        factor = CharFraction(GradedLaurentPoly.constant(rank) + GradedLaurentPoly.monomial(gamma),
                              [gamma])
        product = frac_mul(product, factor)
    return product


def global_theta_checks(p: FixedPointProblem, w: Sequence[Fraction],
                        signature: Scalar | None = None, K: int = DEFAULT_ORDER) -> ThetaReport:
    """
    Expands every local signature character and sums: the NUT charges must
    cancel and the `τ₃` values must add up to the signature.

    Args:
        p: The problem, singular points carrying `chi1` data.
        w: The weight assignment.
        signature: The signature to compare against, when known.
        K: Truncation order of the summed series.
    Returns:
        ThetaReport: Per point `(N, τ₃)`, the sums and the cancellation flags.
    """
    per_point: dict[str, tuple[Scalar, Scalar]] = {}
    total = ThetaSeries(min_order=0, order=K)
    for fp in p.fixed_points:
        series = theta_expand(local_chi1(fp, p.rank), w, max(K, 0))
        per_point[fp.name] = _nut_and_tau3(series)
        total = total + series
    sum_nut = sum((nut for nut, _ in per_point.values()), Scalar())
    sum_tau3 = sum((tau3 for _, tau3 in per_point.values()), Scalar())
    report = ThetaReport(
        per_point=per_point, sum_N=sum_nut, sum_tau3=sum_tau3, total=total,
        sum_n_zero=not sum_nut,
        odd_orders_zero=total.odd_orders_zero(),
        negative_orders_zero=total.negative_orders_zero(),
        signature=signature,
        signature_matches=None if signature is None else sum_tau3 == signature,
    )
    logger.info(f"θ expansion over {len(per_point)} fixed points: ΣN = {sum_nut}, Στ₃ = {sum_tau3}")
    return report
