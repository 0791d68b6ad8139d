"""
Finite difference check that the positive eigenvalues of the Witten deformed
model Laplacian `H_ε = -d²/dx² + ε² x² + c ε` scale linearly in `ε`.
"""
import itertools
import logging
import math
from collections.abc import Sequence

import numpy as np
import scipy.linalg
from pydantic import BaseModel, Field, model_validator

logger = logging.getLogger(__name__)

RECOMMENDED_GRID_POINTS = 200
DECAY_TOLERANCE = 1e-12
LOWEST = 10
POSITIVE = 5
SCALING_TOLERANCE = 1e-2
# Eigenvalues below this multiple of ε count as zero modes
ZERO_MODE_TOLERANCE = 1e-2


class ModelOperator(BaseModel):
    """
    The discretized model operator on `[-L, L]` with Dirichlet ends.

    Attributes:
        epsilon: Deformation parameter `ε`.
        half_width: Half width `L` of the domain.
        grid_points: Number of interior grid points `M`.
        offset: Potential offset `c`; `-1` puts the ground energy at 0.
    """

    epsilon: float = Field(gt=0, title="Epsilon", description="Deformation parameter",
                           examples=[1.0, 2.0, 4.0])
    half_width: float = Field(12.0, gt=0, title="Half width", description="Domain is [-L, L]",
                              examples=[12.0])
    grid_points: int = Field(2000, ge=LOWEST, title="Grid points",
                             description="Number of interior grid points", examples=[2000])
    offset: float = Field(-1.0, title="Offset", description="Potential offset c in c·ε",
                          examples=[-1.0, 0.0])

    @model_validator(mode="after")
    def check_resolution(self) -> "ModelOperator":
        if self.grid_points < RECOMMENDED_GRID_POINTS:
            logger.warning(f"{self.grid_points} grid points is coarser than the recommended "
                           f"{RECOMMENDED_GRID_POINTS}")
        if math.exp(-self.epsilon * self.half_width ** 2 / 2) >= DECAY_TOLERANCE:
            logger.warning(f"Half width {self.half_width} is too small for ε = {self.epsilon}, "
                           "the Dirichlet ends perturb the spectrum")
        return self

    @property
    def spacing(self) -> float:
        return 2 * self.half_width / (self.grid_points + 1)

    def grid(self) -> np.ndarray:
        return -self.half_width + self.spacing * np.arange(1, self.grid_points + 1)

    def matrix(self) -> np.ndarray:
        """Second order central difference matrix of `H_ε`."""
        h = self.spacing
        x = self.grid()
        diagonal = 2 / h ** 2 + self.epsilon ** 2 * x ** 2 + self.offset * self.epsilon
        off_diagonal = np.full(self.grid_points - 1, -1 / h ** 2)
        return np.diag(diagonal) + np.diag(off_diagonal, 1) + np.diag(off_diagonal, -1)

    def exact(self, count: int = LOWEST) -> np.ndarray:
        """Closed form spectrum `ε(2j + 1) + c ε` of the untruncated operator."""
        return self.epsilon * (2 * np.arange(count) + 1 + self.offset)


class SpectrumReport(BaseModel):
    """
    Attributes:
        eigenvalues: The lowest eigenvalues, ascending.
        scaling_ratios: The lowest strictly positive eigenvalues divided by
            `ε`, zero modes excluded.
    """

    epsilon: float
    eigenvalues: list[float]
    scaling_ratios: list[float]


class ScalingReport(BaseModel):
    passed: bool
    max_deviation: float
    ratios: dict[float, list[float]]


def spectrum(op: ModelOperator) -> SpectrumReport:
    """
    The lowest eigenvalues of the discretized operator from a dense symmetric
    eigensolver.

    Raises:
        ValueError: If the eigensolver fails.
    """
    try:
        eigenvalues = scipy.linalg.eigh(op.matrix(), eigvals_only=True,
                                        subset_by_index=[0, LOWEST - 1])
    except np.linalg.LinAlgError as error:
        raise ValueError(f"Eigensolver failed for ε = {op.epsilon}: {error}") from error
    positive = eigenvalues[eigenvalues > ZERO_MODE_TOLERANCE * op.epsilon][:POSITIVE]
    logger.info(f"ε = {op.epsilon}: lowest eigenvalue {eigenvalues[0]:.6g}")
    return SpectrumReport(epsilon=op.epsilon, eigenvalues=eigenvalues.tolist(),
                          scaling_ratios=(positive / op.epsilon).tolist())


def scaling_check(eps_list: Sequence[float], half_width: float = 12.0, grid_points: int = 2000,
                  offset: float = -1.0) -> ScalingReport:
    """
    Checks that every pair of deformation parameters gives the same lowest
    positive eigenvalues after division by `ε`, within 1% relative deviation.

    Args:
        eps_list: At least two distinct deformation parameters.
        half_width: Half width `L` of the domain.
        grid_points: Number of interior grid points `M`.
        offset: Potential offset `c`.
    Returns:
        ScalingReport: Verdict, maximal relative deviation and the ratios.
    Raises:
        ValueError: If fewer than two distinct parameters are given.
    """
    if len({float(eps) for eps in eps_list}) < 2:
        raise ValueError(f"Scaling needs at least two distinct values of ε, got {list(eps_list)}")
    ratios = {
        float(eps): spectrum(ModelOperator(epsilon=eps, half_width=half_width,
                                           grid_points=grid_points, offset=offset)).scaling_ratios
        for eps in eps_list
    }
    deviation = 0.0
    for first, second in itertools.permutations(ratios, 2):
        left, right = np.array(ratios[first]), np.array(ratios[second])
        deviation = max(deviation, float(np.max(np.abs(left - right) / np.abs(right))))
    return ScalingReport(passed=deviation < SCALING_TOLERANCE, max_deviation=deviation,
                         ratios=ratios)


def richardson_ratio(op: ModelOperator) -> float:
    """
    Ratio of the eigenvalue errors on the grid of `op` and on the grid with
    half the spacing; close to 4 for the second order scheme.
    """
    refined = op.model_copy(update={"grid_points": 2 * op.grid_points + 1})
    coarse_error = np.max(np.abs(np.array(spectrum(op).eigenvalues) - op.exact()))
    fine_error = np.max(np.abs(np.array(spectrum(refined).eigenvalues) - refined.exact()))
    return float(coarse_error / fine_error)
