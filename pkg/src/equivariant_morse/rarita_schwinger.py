"""
Spin and k-Rarita–Schwinger twists of the Dolbeault complex.

The spin Dirac operator is the Dolbeault complex twisted by `K^{1/2}`, whose
trace at a smooth fixed point is `λ^{Σγ/2}`. The k-Rarita–Schwinger operator
is the Dolbeault complex twisted by `(TX ⊕ k)⊗K^{1/2}`, with trace
`λ^{Σγ/2} (Σ_j (λ^{γ_j} + λ^{-γ_j}) + k)`. Both twists are self-dual, so the
derived problems carry a zero canonical trace.
"""
import logging
import math
from collections.abc import Sequence
from fractions import Fraction

from equivariant_morse.algebra import (
    Exponent,
    GradedLaurentPoly,
    exp_add,
    exp_neg,
    exp_scale,
    zero_exponent,
)
from equivariant_morse.charfrac import (
    Chamber,
    CharFraction,
    canonicalize,
    frac_equals,
    frac_mul,
    frac_scale,
)
from equivariant_morse.localization import (
    Contribution,
    FixedPoint,
    FixedPointProblem,
    Side,
    collect_terms,
    lefschetz_number,
    morse_index,
    smooth_contribution,
)

logger = logging.getLogger(__name__)


def _require_smooth(fp: FixedPoint) -> None:
    if not fp.weights or fp.explicit_contribution is not None:
        raise ValueError(f"Fixed point {fp.name} is singular, its twisted contribution "
                         "must be supplied explicitly")


def half_weight_sum(fp: FixedPoint, rank: int) -> Exponent:
    total = zero_exponent(rank)
    for gamma in fp.weights:
        total = exp_add(total, gamma)
    return exp_scale(total, Fraction(1, 2))


def rs_trace(fp: FixedPoint, k: int, rank: int) -> GradedLaurentPoly:
    """`Σ_j (λ^{γ_j} + λ^{-γ_j}) + k`, the trace on `TX ⊕ k` before the spin twist."""
    trace = GradedLaurentPoly.constant(rank, k)
    for gamma in fp.weights:
        trace = trace + GradedLaurentPoly.monomial(gamma) + GradedLaurentPoly.monomial(exp_neg(gamma))
    return trace


def spin_contribution(fp: FixedPoint, c: Chamber, n: int) -> Contribution:
    """Morse contribution of the Dolbeault complex twisted by `K^{1/2}`."""
    _require_smooth(fp)
    rank = c.rank
    twisted = fp.model_copy(update={
        "bundle_trace": GradedLaurentPoly.monomial(half_weight_sum(fp, rank)),
        "canonical_trace": None,
    })
    return smooth_contribution(twisted, c, n)


def rs_contribution(fp: FixedPoint, k: int, c: Chamber, n: int) -> Contribution:
    """
    Morse contribution of the k-Rarita–Schwinger complex at a smooth point in
    its consolidated form
    `b^{n_a} ∏_j λ^{|γ_j|/2}/(1 - λ^{|γ_j|}) · (Σ_j (λ^{γ_j} + λ^{-γ_j}) + k)`,
    where `|γ|` is the weight oriented positively for the chamber.

    Args:
        fp: A smooth fixed point.
        k: Number of spin Dirac summands.
        c: The chamber.
        n: The complex dimension.
    Returns:
        Contribution: The single graded term.
    Raises:
        ValueError: If the point is singular or the chamber is not generic.
    """
    _require_smooth(fp)
    c.check_generic(fp.weights, f"weights of {fp.name}")
    rank = c.rank
    oriented = [gamma if c.pairing(gamma) > 0 else exp_neg(gamma) for gamma in fp.weights]
    half = zero_exponent(rank)
    for gamma in oriented:
        half = exp_add(half, exp_scale(gamma, Fraction(1, 2)))
    if len(fp.weights) != n:
        logger.warning(f"Fixed point {fp.name} has {len(fp.weights)} weights in dimension {n}")
    numerator = rs_trace(fp, k, rank).shift(half)
    return collect_terms([(morse_index(fp, c), canonicalize(CharFraction(numerator, oriented)))])


def rs_split_form(fp: FixedPoint, k: int, c: Chamber, n: int) -> Contribution:
    """
    The same contribution built by the Dolbeault rule, with the xi-positive
    weights as `1/(1 - λ^γ)` and the xi-negative ones as `λ^{-γ}/(1 - λ^{-γ})`
    applied to the twisted bundle trace.
    """
    _require_smooth(fp)
    rank = c.rank
    bundle = rs_trace(fp, k, rank).shift(half_weight_sum(fp, rank))
    twisted = fp.model_copy(update={"bundle_trace": bundle, "canonical_trace": None})
    return smooth_contribution(twisted, c, n)


def forms_agree(first: Contribution, second: Contribution) -> bool:
    """True iff both contributions carry the same b degrees with equal fractions."""
    left, right = dict(first), dict(second)
    return left.keys() == right.keys() and all(frac_equals(left[q], right[q]) for q in left)


def _twisted_problem(p: FixedPointProblem, contributions: dict[str, Contribution]) -> FixedPointProblem:
    zero = zero_exponent(p.rank)
    points = tuple(
        fp.model_copy(update={
            "explicit_contribution": tuple(contributions[fp.name]),
            "dual_contribution": None,
            "bundle_trace": None,
            "canonical_trace": zero,
        })
        for fp in p.fixed_points
    )
    return FixedPointProblem(rank=p.rank, dim=p.dim, root_order=math.lcm(p.root_order, 2),
                             chamber=p.chamber, fixed_points=points, poincare=None,
                             variables=p.variables)


def rs_problem(p: FixedPointProblem, k: int) -> FixedPointProblem:
    """
    A problem whose fixed points carry the k-Rarita–Schwinger contributions as
    explicit self-dual data, so every Morse computation runs on it.
    """
    contributions = {fp.name: rs_contribution(fp, k, p.chamber, p.dim) for fp in p.fixed_points}
    logger.info(f"Built the {k}-Rarita-Schwinger problem over {len(contributions)} fixed points")
    return _twisted_problem(p, contributions)


def spin_problem(p: FixedPointProblem) -> FixedPointProblem:
    contributions = {fp.name: spin_contribution(fp, p.chamber, p.dim) for fp in p.fixed_points}
    return _twisted_problem(p, contributions)


def _embed_exponent(u: Exponent, offset: int, rank: int) -> Exponent:
    coords = [Fraction(0)] * rank
    coords[offset:offset + len(u)] = u
    return tuple(coords)


def _embed_poly(p: GradedLaurentPoly, offset: int, rank: int) -> GradedLaurentPoly:
    return GradedLaurentPoly.from_flat(rank, {
        (_embed_exponent(exponent, offset, rank), deg_b, deg_y): value
        for (exponent, deg_b, deg_y), value in p.flat().items()
    })


def embed_fraction(f: CharFraction, offset: int, rank: int) -> CharFraction:
    """Places a fraction in the variable block starting at `offset` of a larger torus."""
    return CharFraction(_embed_poly(f.numerator, offset, rank),
                        [_embed_exponent(u, offset, rank) for u in f.denominator])


def product_problem(p1: FixedPointProblem, p2: FixedPointProblem) -> FixedPointProblem:
    """
    The product of two smooth problems, acted on by the product torus with
    disjoint variable blocks. Fixed points are the pairs of fixed points and
    carry the union of the embedded weights.

    Raises:
        ValueError: If either problem has a singular point or a point
            without weights.
    """
    rank = p1.rank + p2.rank
    for problem in (p1, p2):
        for fp in problem.fixed_points:
            _require_smooth(fp)
    points = []
    for first in p1.fixed_points:
        for second in p2.fixed_points:
            bundle = (_embed_poly(first.bundle(p1.rank), 0, rank)
                      * _embed_poly(second.bundle(p2.rank), p1.rank, rank))
            weights = tuple(_embed_exponent(gamma, 0, rank) for gamma in first.weights) + tuple(
                _embed_exponent(gamma, p1.rank, rank) for gamma in second.weights)
            points.append(FixedPoint(name=f"({first.name}, {second.name})", weights=weights,
                                     bundle_trace=None if bundle == GradedLaurentPoly.constant(rank)
                                     else bundle))
    variables = None
    if p1.variables is not None and p2.variables is not None:
        variables = p1.variables + p2.variables
        if len(set(variables)) != rank:
            raise ValueError(f"Variable names collide in the product: {list(variables)}")
    return FixedPointProblem(rank=rank, dim=p1.dim + p2.dim,
                             root_order=math.lcm(p1.root_order, p2.root_order),
                             chamber=Chamber(p1.chamber.xi + p2.chamber.xi),
                             fixed_points=tuple(points), variables=variables)


def rs_index(p: FixedPointProblem, k: int) -> CharFraction:
    """The k-Rarita–Schwinger equivariant index, the Lefschetz number at `b = -1`."""
    return lefschetz_number(rs_problem(p, k), Side.morse)


def spin_index(p: FixedPointProblem) -> CharFraction:
    return lefschetz_number(spin_problem(p), Side.morse)


def rs_product_check(p1: FixedPointProblem, p2: FixedPointProblem, k: int) -> bool:
    """
    The product formula
    `Ind_RS(X₁×X₂) = Ind_RS(X₁) Ind_S(X₂) + Ind_RS(X₂) Ind_S(X₁) - k Ind_S(X₁×X₂)`,
    checked exactly on characters.
    """
    product = product_problem(p1, p2)
    rank = product.rank
    rs_first = embed_fraction(rs_index(p1, k), 0, rank)
    rs_second = embed_fraction(rs_index(p2, k), p1.rank, rank)
    spin_first = embed_fraction(spin_index(p1), 0, rank)
    spin_second = embed_fraction(spin_index(p2), p1.rank, rank)
    expected = (frac_mul(rs_first, spin_second) + frac_mul(rs_second, spin_first)
                - frac_scale(spin_index(product), k))
    holds = frac_equals(rs_index(product, k), expected)
    logger.info(f"Product formula at k={k}: {'holds' if holds else 'fails'}")
    return holds


def rs_kernel_bound(weights: Sequence[Exponent], chamber: Chamber | None = None) -> int:
    """
    Upper bound on the kernel of the k-Rarita–Schwinger operator at a point:
    `Σ_m L_m`, where `L_m` counts the nonnegative integer tuples `l` with
    `Σ|γ_j| - 2|γ_m| + Σ l_j |γ_j| ≤ 0`.

    Args:
        weights: The weights at the point.
        chamber: Reduces the weights to magnitudes `|⟨xi, γ⟩|`; without it the
            weights must have rank 1.
    Returns:
        int: The bound.
    Raises:
        ValueError: If a magnitude is not a positive integer.
    """
    magnitudes: list[int] = []
    for gamma in weights:
        if chamber is not None:
            value = abs(chamber.pairing(gamma))
        elif len(gamma) == 1:
            value = abs(gamma[0])
        else:
            raise ValueError(f"Weight {[str(c) for c in gamma]} needs a chamber for its magnitude")
        if value <= 0 or value.denominator != 1:
            raise ValueError(f"Weight magnitude {value} is not a positive integer")
        magnitudes.append(int(value))
    total = sum(magnitudes)
    return sum(_count_tuples(magnitudes, 2 * magnitude - total) for magnitude in magnitudes)


def _count_tuples(magnitudes: Sequence[int], budget: int) -> int:
    """Number of nonnegative integer tuples `l` with `Σ l_j w_j ≤ budget`."""
    if budget < 0:
        return 0
    if not magnitudes:
        return 1
    head, tail = magnitudes[0], magnitudes[1:]
    return sum(_count_tuples(tail, budget - head * count) for count in range(budget // head + 1))
