"""
Fixed point data and the Morse theoretic computations built on it: local
contributions and their Serre duals, global closed forms, chamber series,
classical Morse polynomials, the strong inequalities, the lacunary principle
and the vanishing test for fractional canonical twists.
"""
import logging
from collections.abc import Iterable
from enum import Enum
from fractions import Fraction

from pydantic import BaseModel, ConfigDict, Field, model_validator

from equivariant_morse.algebra import (
    Exponent,
    GradedLaurentPoly,
    Scalar,
    ScalarLike,
    exp_add,
    exp_neg,
    exp_scale,
    exponent_denominators,
    zero_exponent,
)
from equivariant_morse.charfrac import (
    Chamber,
    ChamberSeries,
    CharFraction,
    canonicalize,
    chamber_expand,
    frac_add,
    frac_equals,
    frac_eval_grading,
    frac_invert_vars,
    frac_scale,
    frac_sum,
)

logger = logging.getLogger(__name__)

Contribution = list[tuple[int, CharFraction]]


class Side(str, Enum):
    morse = "morse"
    dual = "dual"


class FixedPoint(BaseModel):
    """
    An isolated fixed point of the torus action.

    Attributes:
        name: Identifier of the fixed point, unique within a problem.
        weights: The tangent cone weights `γ_j` as torus characters.
        bundle_trace: Trace `E_a` of the action on the bundle fibre, None
            means the trivial bundle.
        explicit_contribution: Morse side contribution overriding the smooth
            formula, as `(b degree, fraction)` pairs.
        dual_contribution: Explicit dual side contribution.
        canonical_trace: Exponent `κ_a` of the trace of the action on the
            canonical bundle.
        chi1: Explicit local equivariant signature character used by the
            θ expansion.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    name: str = Field(title="Name", description="Fixed point identifier",
                      examples=["[0:1]", "a1", "singular"])
    weights: tuple[Exponent, ...] = Field(
        (), title="Weights", description="Tangent cone weights as exponent vectors",
        examples=[[["1"]], [["-4", "0"], ["-1", "1"]]]
    )
    bundle_trace: GradedLaurentPoly | None = Field(
        None, title="Bundle trace", description="Trace of the action on the bundle, None is trivial"
    )
    explicit_contribution: tuple[tuple[int, CharFraction], ...] | None = Field(
        None, title="Explicit contribution",
        description="Morse side local contribution as (b degree, fraction) pairs"
    )
    dual_contribution: tuple[tuple[int, CharFraction], ...] | None = Field(
        None, title="Dual contribution",
        description="Dual side local contribution as (b degree, fraction) pairs"
    )
    canonical_trace: Exponent | None = Field(
        None, title="Canonical trace", description="Exponent of the canonical bundle trace"
    )
    chi1: CharFraction | None = Field(
        None, title="Signature character", description="Local equivariant signature character"
    )

    @model_validator(mode="after")
    def check_local_data(self) -> "FixedPoint":
        if not self.weights and not self.explicit_contribution:
            raise ValueError(f"Fixed point {self.name} needs weights or a nonempty explicit contribution")
        return self

    def bundle(self, rank: int) -> GradedLaurentPoly:
        if self.bundle_trace is None:
            return GradedLaurentPoly.constant(rank)
        return self.bundle_trace

    def is_smooth(self) -> bool:
        return self.explicit_contribution is None

    def exponents(self) -> list[Exponent]:
        """Every exponent carried by the fixed point, for rank and root order checks."""
        found: list[Exponent] = list(self.weights)
        if self.canonical_trace is not None:
            found.append(self.canonical_trace)
        polys: list[GradedLaurentPoly] = []
        fractions: list[CharFraction] = []
        if self.bundle_trace is not None:
            polys.append(self.bundle_trace)
        for terms in (self.explicit_contribution, self.dual_contribution):
            fractions.extend(fraction for _, fraction in terms or ())
        if self.chi1 is not None:
            fractions.append(self.chi1)
        for fraction in fractions:
            polys.append(fraction.numerator)
            found.extend(fraction.denominator)
        for poly in polys:
            found.extend(poly.exponents())
        return found


class FixedPointProblem(BaseModel):
    """
    The complete fixed point data of a torus action on an `n` dimensional
    complex space.

    Attributes:
        rank: Rank `r` of the torus.
        dim: Complex dimension `n`.
        root_order: Every exponent denominator divides this order.
        chamber: The generic chamber selecting the Morse side expansion.
        fixed_points: The fixed points.
        poincare: Optional global Poincaré polynomial `Σ b^q Tr T|H^q`.
        variables: Optional names of the torus variables.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    rank: int = Field(ge=1, title="Rank", description="Rank of the torus", examples=[1, 2])
    dim: int = Field(ge=1, title="Dimension", description="Complex dimension", examples=[1, 2, 3])
    root_order: int = Field(1, ge=1, title="Root order",
                            description="Common denominator of all exponents", examples=[1, 2])
    chamber: Chamber = Field(title="Chamber", description="Generic linear functional")
    fixed_points: tuple[FixedPoint, ...] = Field(title="Fixed points",
                                                 description="Isolated fixed points")
    poincare: GradedLaurentPoly | None = Field(None, title="Poincaré polynomial",
                                               description="Global traces Σ b^q Tr T|H^q")
    variables: tuple[str, ...] | None = Field(None, title="Variables",
                                              description="Names of the torus variables",
                                              examples=[["λ", "μ"]])

    @model_validator(mode="after")
    def check_consistency(self) -> "FixedPointProblem":
        if self.chamber.rank != self.rank:
            raise ValueError(f"Chamber has {self.chamber.rank} coordinates, expected rank {self.rank}")
        if self.variables is not None and len(self.variables) != self.rank:
            raise ValueError(f"Expected {self.rank} variable names, got {len(self.variables)}")
        names = [fp.name for fp in self.fixed_points]
        duplicates = sorted({name for name in names if names.count(name) > 1})
        if duplicates:
            raise ValueError(f"Duplicate fixed point names: {duplicates}")
        for fp in self.fixed_points:
            for exponent in fp.exponents():
                if len(exponent) != self.rank:
                    raise ValueError(f"Fixed point {fp.name}: exponent {[str(c) for c in exponent]} "
                                     f"does not have length {self.rank}")
                bad = {d for d in exponent_denominators(exponent) if self.root_order % d}
                if bad:
                    raise ValueError(f"Fixed point {fp.name}: exponent denominators {sorted(bad)} "
                                     f"do not divide the root order {self.root_order}")
            self.chamber.check_generic(fp.weights, f"weights of {fp.name}")
            for terms in (fp.explicit_contribution, fp.dual_contribution):
                for deg_b, fraction in terms or ():
                    self.chamber.check_generic(fraction.denominator, f"contribution of {fp.name}")
                    if deg_b > self.dim or fraction.numerator.max_y_degree() > self.dim:
                        logger.warning(f"Fixed point {fp.name} carries grading degrees above "
                                       f"the dimension {self.dim}")
        return self

    def fixed_point(self, name: str) -> FixedPoint:
        for fp in self.fixed_points:
            if fp.name == name:
                return fp
        raise KeyError(f"No fixed point named {name!r}, known: {[fp.name for fp in self.fixed_points]}")


class InequalityReport(BaseModel):
    """
    Outcome of the strong Morse inequalities `M - P = (1 + b) Q`.

    Attributes:
        Q: The error polynomial, its b degree is the index `q` of `Q_q^μ`.
        holds: True iff every `Q` coefficient is a nonnegative integer and the
            top degree is consistent for every exponent in the window.
        inconsistent: Exponents where `M_n - P_n ≠ Q_{n-1}`.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    Q: GradedLaurentPoly
    holds: bool
    inconsistent: tuple[Exponent, ...] = ()


class LacunaryVerdict(BaseModel):
    """
    Attributes:
        equals_poincare: True when no two adjacent b degrees are occupied for
            any exponent, so the classical polynomial is the Poincaré polynomial.
        poincare_if_equal: The Poincaré polynomial when concluded.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    equals_poincare: bool
    poincare_if_equal: GradedLaurentPoly | None = None


class ClassicalReport(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    polynomial: GradedLaurentPoly
    stable: bool
    cutoff: Fraction
    lacunary: LacunaryVerdict


def collect_terms(terms: Iterable[tuple[int, CharFraction]]) -> Contribution:
    """Merges terms of equal b degree, drops zeros and sorts by b degree."""
    merged: dict[int, CharFraction] = {}
    for deg_b, fraction in terms:
        merged[deg_b] = frac_add(merged[deg_b], fraction) if deg_b in merged else canonicalize(fraction)
    return [(deg_b, merged[deg_b]) for deg_b in sorted(merged) if merged[deg_b]]


def assemble(terms: Contribution, rank: int) -> CharFraction:
    """The single fraction `Σ_q b^q f_q`."""
    return frac_sum((frac_scale(fraction, GradedLaurentPoly.constant(rank, 1, deg_b=deg_b))
                     for deg_b, fraction in terms), rank)


def smooth_contribution(fp: FixedPoint, c: Chamber, n: int) -> Contribution:
    """
    Local Morse contribution `b^{n_a} E_a ∏_{γ>0} 1/(1-λ^γ) ∏_{γ<0} λ^{-γ}/(1-λ^{-γ})`
    where the sign of a weight is the sign of its chamber pairing. An explicit
    contribution is returned verbatim.

    Args:
        fp: The fixed point.
        c: The chamber.
        n: The complex dimension.
    Returns:
        Contribution: `(b degree, fraction)` pairs, merged with the b grading
            of the bundle trace.
    Raises:
        ValueError: If the point has neither weights nor an explicit
            contribution, or the chamber is orthogonal to a weight.
    """
    if fp.explicit_contribution is not None:
        return list(fp.explicit_contribution)
    if not fp.weights:
        raise ValueError(f"Fixed point {fp.name} has neither weights nor an explicit contribution")
    c.check_generic(fp.weights, f"weights of {fp.name}")
    if len(fp.weights) != n:
        logger.warning(f"Fixed point {fp.name} has {len(fp.weights)} weights in dimension {n}")
    index = 0
    shift = zero_exponent(c.rank)
    factors: list[Exponent] = []
    for gamma in fp.weights:
        if c.pairing(gamma) > 0:
            factors.append(gamma)
        else:
            index += 1
            shift = exp_add(shift, exp_neg(gamma))
            factors.append(exp_neg(gamma))
    terms = [(index + deg_b, CharFraction(part.shift(shift), factors))
             for deg_b, part in fp.bundle(c.rank).split_by_b().items()]
    return collect_terms(terms)


def morse_index(fp: FixedPoint, c: Chamber) -> int:
    return sum(1 for gamma in fp.weights if c.pairing(gamma) < 0)


def default_canonical_trace(fp: FixedPoint, rank: int) -> Exponent:
    """
    The canonical trace exponent of a smooth point, `-Σ γ_j`, corrected by
    `2v` when the bundle trace is a monomial `c·λ^v` so that the dual equals
    the opposite chamber expansion of the same complex.

    Raises:
        ValueError: If the point is singular or its bundle is not a monomial.
    """
    if fp.canonical_trace is not None:
        return fp.canonical_trace
    if not fp.weights or fp.explicit_contribution is not None:
        raise ValueError(f"Singular fixed point {fp.name} needs a canonical trace "
                         "or an explicit dual contribution")
    kappa = zero_exponent(rank)
    for gamma in fp.weights:
        kappa = exp_add(kappa, exp_neg(gamma))
    if fp.bundle_trace is not None:
        monomial = fp.bundle_trace.as_monomial()
        if monomial is None:
            raise ValueError(f"Fixed point {fp.name} has a bundle trace that is not a monomial, "
                             "supply a canonical trace")
        kappa = exp_add(kappa, exp_scale(monomial[0], 2))
    return kappa


def dual_contribution(terms: Contribution, fp: FixedPoint, n: int,
                      canonical: Exponent | None = None, rank: int | None = None) -> Contribution:
    """
    Serre dual of a local contribution: each `(q, f)` maps to
    `(n - q, λ^κ · f(λ⁻¹))`. Explicit dual data is returned verbatim.

    Args:
        terms: The Morse side contribution.
        fp: The fixed point it belongs to.
        n: The complex dimension.
        canonical: Overrides the canonical trace exponent `κ`.
        rank: The torus rank, read off the local data when None.
    Returns:
        Contribution: The dual contribution.
    Raises:
        ValueError: For a singular point with neither `κ` nor dual data, a
            b degree above `n`, or when the rank cannot be read off.
    """
    if fp.dual_contribution is not None and canonical is None:
        return list(fp.dual_contribution)
    if rank is None:
        known = [len(kappa) for kappa in (canonical, fp.canonical_trace) if kappa is not None]
        known += [fraction.rank for _, fraction in terms] + [len(gamma) for gamma in fp.weights]
        if not known:
            raise ValueError(f"Cannot read the torus rank off fixed point {fp.name}")
        rank = known[0]
    kappa = canonical if canonical is not None else default_canonical_trace(fp, rank)
    twist = GradedLaurentPoly.monomial(kappa)
    dual_terms: Contribution = []
    for deg_b, fraction in terms:
        if deg_b > n:
            raise ValueError(f"Fixed point {fp.name}: b degree {deg_b} exceeds the dimension {n}")
        dual_terms.append((n - deg_b, canonicalize(frac_scale(frac_invert_vars(fraction), twist))))
    return collect_terms(dual_terms)


def local_contribution(fp: FixedPoint, problem: FixedPointProblem, side: Side) -> Contribution:
    morse = smooth_contribution(fp, problem.chamber, problem.dim)
    if side is Side.morse:
        return morse
    return dual_contribution(morse, fp, problem.dim, rank=problem.rank)


def global_closed_form(p: FixedPointProblem, side: Side = Side.morse) -> Contribution:
    """
    Sum of the local contributions over all fixed points, per b degree.
    """
    terms: Contribution = []
    for fp in p.fixed_points:
        terms.extend(local_contribution(fp, p, side))
    logger.info(f"Assembled {side.value} closed form over {len(p.fixed_points)} fixed points")
    return collect_terms(terms)


def lefschetz_number(p: FixedPointProblem, side: Side = Side.morse,
                     b_val: ScalarLike = -1, y_val: ScalarLike | None = None) -> CharFraction:
    """
    The global closed form evaluated at `b = b_val` (and `y = y_val` when
    given); `b = -1` is the Lefschetz number.
    """
    return frac_eval_grading(assemble(global_closed_form(p, side), p.rank), b_val, y_val)


def morse_series(p: FixedPointProblem, T: Fraction) -> ChamberSeries:
    return chamber_expand(assemble(global_closed_form(p, Side.morse), p.rank), p.chamber, T)


def dual_series(p: FixedPointProblem, T: Fraction) -> ChamberSeries:
    return chamber_expand(assemble(global_closed_form(p, Side.dual), p.rank),
                          p.chamber.opposite(), T)


def _classical_window(p: FixedPointProblem, T: Fraction) -> GradedLaurentPoly:
    morse = morse_series(p, T).terms
    dual = dual_series(p, T).terms
    minimum: dict[tuple[Exponent, int, int], Scalar] = {}
    for key in set(morse.flat()) | set(dual.flat()):
        if abs(p.chamber.pairing(key[0])) > T:
            continue
        morse_value, dual_value = morse.coefficient(*key), dual.coefficient(*key)
        for value, side in ((morse_value, Side.morse), (dual_value, Side.dual)):
            if not value.is_nonnegative_integer():
                raise ValueError(f"The {side.value} series has the coefficient {value} at "
                                 f"{[str(c) for c in key[0]]} (b^{key[1]} y^{key[2]}), "
                                 "expected a nonnegative integer")
        minimum[key] = Scalar(min(morse_value.re, dual_value.re))
    return GradedLaurentPoly.from_flat(p.rank, minimum)


def classical_morse(p: FixedPointProblem, T: Fraction) -> ClassicalReport:
    """
    The classical Morse polynomial: on the window `|⟨xi, μ⟩| ≤ T` the
    termwise minimum of the Morse series (chamber `xi`) and the dual series
    (chamber `-xi`).

    The result is stable when widening the window to `2T` adds nothing.

    Args:
        p: The problem.
        T: The cutoff.
    Returns:
        ClassicalReport: The polynomial, its stability and lacunary verdict.
    Raises:
        ValueError: If a coefficient in the window is not a nonnegative
            integer.
    """
    T = Fraction(T)
    polynomial = _classical_window(p, T)
    stable = _classical_window(p, 2 * T) == polynomial
    if not stable:
        logger.warning(f"Classical Morse polynomial changed between cutoffs {T} and {2 * T}")
    return ClassicalReport(polynomial=polynomial, stable=stable, cutoff=T,
                           lacunary=lacunary_conclusion(polynomial, p.dim))


def verify_inequality(morse: ChamberSeries, poincare: GradedLaurentPoly,
                      n: int) -> InequalityReport:
    """
    Solves `M_q - P_q = Q_q + Q_{q-1}` recursively (with `Q_{-1} = 0`) for
    every exponent `μ` in the window of the series.

    Args:
        morse: The Morse (or dual) series.
        poincare: The Poincaré polynomial.
        n: The complex dimension.
    Returns:
        InequalityReport: The `Q` polynomial, whether the inequalities hold and
            the exponents where the top degree is inconsistent.
    """
    chamber, cutoff = morse.chamber, morse.cutoff
    in_window = {key: value for key, value in poincare.flat().items()
                 if chamber.pairing(key[0]) <= cutoff}
    difference = morse.terms - GradedLaurentPoly.from_flat(poincare.rank, in_window)
    slots = sorted({(exponent, deg_y) for exponent, _, deg_y in difference.flat()})
    q_terms: dict[tuple[Exponent, int, int], Scalar] = {}
    holds = True
    inconsistent: list[Exponent] = []
    for exponent, deg_y in slots:
        previous = Scalar()
        for deg_b in range(n):
            current = difference.coefficient(exponent, deg_b, deg_y) - previous
            if current:
                q_terms[(exponent, deg_b, deg_y)] = current
            holds = holds and current.is_nonnegative_integer()
            previous = current
        above = [key for key in difference.flat()
                 if key[0] == exponent and key[2] == deg_y and key[1] > n]
        if difference.coefficient(exponent, n, deg_y) != previous or above:
            inconsistent.append(exponent)
    if inconsistent:
        logger.warning(f"Top degree inconsistent at {len(inconsistent)} exponents")
    return InequalityReport(Q=GradedLaurentPoly.from_flat(poincare.rank, q_terms),
                            holds=holds and not inconsistent,
                            inconsistent=tuple(inconsistent))


def lacunary_conclusion(classical: GradedLaurentPoly, n: int) -> LacunaryVerdict:
    """
    If no exponent carries two adjacent b degrees, the classical polynomial
    is the Poincaré polynomial; otherwise the verdict is inconclusive.
    """
    occupied: dict[tuple[Exponent, int], set[int]] = {}
    for exponent, deg_b, deg_y in classical.flat():
        occupied.setdefault((exponent, deg_y), set()).add(deg_b)
    for degrees in occupied.values():
        if any(deg_b + 1 in degrees for deg_b in degrees):
            return LacunaryVerdict(equals_poincare=False)
    if classical.max_b_degree() > n:
        logger.warning(f"Classical polynomial has b degree above the dimension {n}")
    return LacunaryVerdict(equals_poincare=True, poincare_if_equal=classical)


def check_vanishing(p: FixedPointProblem, T: Fraction) -> bool:
    """True iff the classical Morse polynomial is zero and stable at `T`."""
    report = classical_morse(p, T)
    return not report.polynomial and report.stable


def dual_consistency(p: FixedPointProblem) -> list[str]:
    """
    Names of fixed points whose explicit dual data disagrees with the
    canonical trace rule, or whose b degrees are not `n - q` of the Morse ones.
    """
    flagged: list[str] = []
    for fp in p.fixed_points:
        if fp.dual_contribution is None:
            continue
        morse = smooth_contribution(fp, p.chamber, p.dim)
        explicit = list(fp.dual_contribution)
        try:
            expected = dual_contribution(morse, fp, p.dim,
                                         canonical=default_canonical_trace(fp, p.rank), rank=p.rank)
        except ValueError:
            expected_degrees = sorted(p.dim - deg_b for deg_b, _ in morse)
            if expected_degrees != sorted(deg_b for deg_b, _ in explicit):
                flagged.append(fp.name)
            continue
        explicit_map = dict(collect_terms(explicit))
        expected_map = dict(expected)
        if (explicit_map.keys() != expected_map.keys()
                or not all(frac_equals(explicit_map[q], expected_map[q]) for q in expected_map)):
            flagged.append(fp.name)
    for name in flagged:
        logger.warning(f"Explicit dual data at {name} disagrees with the canonical trace rule")
    return flagged


def lefschetz_duality_check(p: FixedPointProblem) -> bool:
    """
    The closed form of Serre duality: the dual Lefschetz number equals the
    Morse Lefschetz number.
    """
    return frac_equals(lefschetz_number(p, Side.morse), lefschetz_number(p, Side.dual))
