"""
The equivariant Poincaré–Hodge polynomial `χ_{y,b} = Σ_p y^p Σ_q b^q Tr T|H^{p,q}`,
assembled from one fixed point problem per form degree `p`.
"""
import logging
from collections.abc import Mapping

from pydantic import BaseModel, ConfigDict

from equivariant_morse.algebra import GradedLaurentPoly, exp_neg
from equivariant_morse.charfrac import (
    CharFraction,
    frac_eval_grading,
    frac_reduce,
    frac_scale,
    frac_sum,
)
from equivariant_morse.localization import FixedPointProblem, Side, assemble, local_contribution

logger = logging.getLogger(__name__)


class ChiReport(BaseModel):
    """
    Attributes:
        chi: The global `χ_{y,b}` as a character fraction.
        polynomial: Its reduction to a Laurent polynomial, when it is one.
        local: Local `χ_{y,b}` per fixed point name.
        signature: `χ_{y,b}` at `b = -1, y = 1`.
        self_dual: Outcome of the duality check, None when `chi` is not a
            polynomial.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    chi: CharFraction
    polynomial: GradedLaurentPoly | None
    local: dict[str, CharFraction]
    signature: CharFraction
    self_dual: bool | None


def chi_yb_assemble(per_p_problems: Mapping[int, FixedPointProblem], n: int) -> ChiReport:
    """
    Multiplies each degree `p` problem's Morse closed form by `y^p` and sums.

    Args:
        per_p_problems: The problem for each form degree `p`.
        n: The complex dimension.
    Returns:
        ChiReport: The global and local polynomials, signature and duality.
    Raises:
        ValueError: If the problems disagree on rank, chamber or dimension.
    """
    if not per_p_problems:
        raise ValueError("No form degree problems to assemble")
    problems = list(per_p_problems.values())
    reference = problems[0]
    for problem in problems[1:]:
        if problem.rank != reference.rank or problem.chamber != reference.chamber:
            raise ValueError("Form degree problems have mismatched ranks or chambers")
    for degree, problem in per_p_problems.items():
        if problem.dim != n:
            raise ValueError(f"Form degree {degree} problem has dimension {problem.dim}, expected {n}")
        if not 0 <= degree <= n:
            raise ValueError(f"Form degree {degree} is outside 0..{n}")
    rank = reference.rank
    local_parts: dict[str, list[CharFraction]] = {}
    for degree in sorted(per_p_problems):
        problem = per_p_problems[degree]
        y_power = GradedLaurentPoly.constant(rank, 1, deg_y=degree)
        for fp in problem.fixed_points:
            local = assemble(local_contribution(fp, problem, Side.morse), rank)
            local_parts.setdefault(fp.name, []).append(frac_scale(local, y_power))
    local = {name: frac_sum(parts, rank) for name, parts in local_parts.items()}
    chi = frac_sum(local.values(), rank)
    polynomial = frac_reduce(chi)
    self_dual = chi_duality_check(polynomial, n) if polynomial is not None else None
    logger.info(f"Assembled χ_(y,b) over {len(per_p_problems)} form degrees and {len(local)} fixed points")
    return ChiReport(chi=chi, polynomial=polynomial, local=local,
                     signature=frac_eval_grading(chi, -1, 1), self_dual=self_dual)


def chi_duality_check(chi: GradedLaurentPoly, n: int) -> bool:
    """True iff `chi(b, y, λ) = (by)^n chi(b⁻¹, y⁻¹, λ⁻¹)` exactly."""
    reflected: dict = {}
    for (exponent, deg_b, deg_y), value in chi.flat().items():
        if deg_b > n or deg_y > n:
            return False
        reflected[(exp_neg(exponent), n - deg_b, n - deg_y)] = value
    return GradedLaurentPoly.from_flat(chi.rank, reflected) == chi
