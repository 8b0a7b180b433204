# Copyright 2024 Canonical Ltd.
# See LICENSE file for licensing details.

"""Fusion-center matrix completion and the sampling bounds of the sensing constraints.

The fusion center receives compressed columns x_j = Θ_j·s_j from the active SUs only.
The spectrum matrix S = [s_1 … s_J] is estimated by nuclear-norm regularized least
squares restricted to the observed columns (singular value thresholding with a
decreasing threshold), followed by an alternating least-squares refinement on the rank
the thresholding settled on. Columns of inactive SUs carry no data; they are filled with
the mean column coefficient in the recovered column space, which is exact when every SU
sees the same occupancy.
"""

import dataclasses
import logging
import math
import typing

import numpy as np

import mathkit
from exception import DimensionMismatchError, DomainError
from sensing import MeasurementOp, energy_detect
from state.completion import CompletionConfig

logger = logging.getLogger(__name__)

# Threshold decay per iteration while continuing towards the final threshold.
CONTINUATION_DECAY = 0.9
# Lowest final threshold, relative to the spectral norm of the back-projected data.
RELATIVE_TAU_FLOOR = 1e-9
# Singular values below this share of the largest are treated as zero.
RANK_TOLERANCE = 1e-9
DIVERGENCE_WINDOW = 10
REFINE_ROUNDS = 50


@dataclasses.dataclass(frozen=True)
class FcMatrix:
    """Measurements collected at the fusion center.

    Attributes:
        X: Λ×J measurement matrix; columns of unobserved SUs hold NaN.
        observed: Indices of the reporting SUs, ascending.
        ground_truth: Optional n×J spectrum matrix for evaluation.
    """

    X: np.ndarray
    observed: tuple[int, ...]
    ground_truth: typing.Optional[np.ndarray] = None

    @property
    def J(self) -> int:  # noqa: N802
        """Return the number of SUs."""
        return int(self.X.shape[1])

    @property
    def J1(self) -> int:  # noqa: N802
        """Return the number of reporting SUs."""
        return len(self.observed)

    def column(self, index: int) -> np.ndarray:
        """Return an observed column.

        Args:
            index: SU index.

        Returns:
            The Λ measurements of that SU.

        Raises:
            DomainError: if the SU did not report.
        """
        if index not in self.observed:
            raise DomainError(f"column {index} is not observed")
        return self.X[:, index]


class CompletionResult(typing.NamedTuple):
    """Outcome of matrix completion.

    Attributes:
        estimate: n×J spectrum matrix estimate.
        converged: Whether the stopping rule was met.
        diverged: Whether the data residual grew for DIVERGENCE_WINDOW iterations.
        iterations: Thresholding iterations spent.
        residuals: ‖Θ_j·ŝ_j - x_j‖ per observed column.
        rank: Rank of the estimate.
    """

    estimate: np.ndarray
    converged: bool
    diverged: bool
    iterations: int
    residuals: dict[int, float]
    rank: int


class ObservationBound(typing.NamedTuple):
    """Minimum observed measurement count at the fusion center.

    Attributes:
        count: Required total number of observed measurements.
        exceeds_matrix: Whether the count exceeds n·J (unattainable).
    """

    count: int
    exceeds_matrix: bool


def assemble_fc_matrix(views: typing.Sequence[tuple[int, np.ndarray]], J: int) -> FcMatrix:
    """Place the reported columns of the active SUs into a Λ×J matrix.

    Args:
        views: (SU index, compressed column) pairs.
        J: Total number of SUs.

    Returns:
        FcMatrix: the masked matrix.

    Raises:
        DomainError: on duplicate or out-of-range indices, or no views.
        DimensionMismatchError: if the columns differ in length.
    """
    if not views:
        raise DomainError("at least one reported column is required")
    indices = [index for index, _ in views]
    if len(set(indices)) != len(indices):
        raise DomainError(f"duplicate SU index in {indices}")
    if any(not 0 <= index < J for index in indices):
        raise DomainError(f"SU index out of range [0, {J})")
    lengths = {np.size(column) for _, column in views}
    if len(lengths) != 1:
        raise DimensionMismatchError(f"columns differ in length: {sorted(lengths)}")
    matrix = np.full((lengths.pop(), J), np.nan, dtype=complex)
    for index, column in views:
        matrix[:, index] = column
    return FcMatrix(X=matrix, observed=tuple(sorted(indices)))


def _shrink(matrix: np.ndarray, threshold: float) -> tuple[np.ndarray, np.ndarray]:
    """Soft-threshold the singular values of a matrix."""
    left, values, right = mathkit.svd(matrix)
    shrunk = np.clip(values - threshold, 0.0, None)
    kept = shrunk > 0.0
    return (left[:, kept] * shrunk[kept]) @ right[:, kept].conj().T, shrunk


def _misfit(thetas: list[np.ndarray], data: np.ndarray, estimate: np.ndarray) -> np.ndarray:
    """Per-column data misfit Θ_j·ŝ_j - x_j as a Λ×J1 matrix."""
    return np.column_stack([theta @ estimate[:, col] for col, theta in enumerate(thetas)]) - data


def _back_project(thetas: list[np.ndarray], residual: np.ndarray) -> np.ndarray:
    """Apply the adjoint of the masked operator column by column."""
    return np.column_stack(
        [theta.conj().T @ residual[:, col] for col, theta in enumerate(thetas)]
    )


def _invert_columns(ops: list[MeasurementOp], data: np.ndarray) -> np.ndarray:
    """Invert square operators column by column."""
    columns = []
    for col, op in enumerate(ops):
        if op.is_identity:
            columns.append(np.fft.fft(data[:, col], norm="ortho"))
        else:
            columns.append(np.linalg.solve(op.Theta, data[:, col]))
    return np.column_stack(columns)


def _threshold_iterations(
    thetas: list[np.ndarray], data: np.ndarray, cfg: CompletionConfig
) -> tuple[np.ndarray, int, bool, bool]:
    """Proximal gradient with a decreasing singular-value threshold.

    Returns:
        The estimate, iterations, whether it converged and whether it diverged.
    """
    lipschitz = max(float(np.linalg.norm(theta, 2)) ** 2 for theta in thetas)
    step = cfg.step / lipschitz
    start_tau = 0.5 * float(np.linalg.norm(_back_project(thetas, data), 2))
    final_tau = max(cfg.threshold_tau, RELATIVE_TAU_FLOOR * start_tau)
    tau = max(start_tau, final_tau)
    estimate = np.zeros((thetas[0].shape[1], len(thetas)), dtype=complex)
    previous_misfit = math.inf
    growth = 0
    for iteration in range(1, cfg.max_iter + 1):
        gradient = _back_project(thetas, _misfit(thetas, data, estimate))
        updated, _ = _shrink(estimate - step * gradient, step * tau)
        change = float(np.linalg.norm(updated - estimate))
        scale = max(float(np.linalg.norm(estimate)), np.finfo(float).tiny)
        estimate = updated
        misfit = float(np.linalg.norm(_misfit(thetas, data, estimate)))
        growth = growth + 1 if misfit > previous_misfit else 0
        previous_misfit = misfit
        if growth >= DIVERGENCE_WINDOW:
            logger.warning("Completion residual grew for %d iterations", growth)
            return estimate, iteration, False, True
        if tau <= final_tau and change / scale <= cfg.tol:
            return estimate, iteration, True, False
        tau = max(final_tau, tau * CONTINUATION_DECAY)
    return estimate, cfg.max_iter, False, False


def rank_cap(n: int, columns: int, measurements: int) -> int:
    """Largest rank r whose r·(n + columns - r) unknowns fit in half the measurements."""
    cap = 0
    while cap < min(n, columns) and (cap + 1) * (n + columns - cap - 1) <= measurements // 2:
        cap += 1
    return max(cap, 1)


def detect_rank(values: np.ndarray, cap: int) -> int:
    """Pick the rank at the largest drop between consecutive singular values.

    Args:
        values: Singular values, descending.
        cap: Largest admissible rank.

    Returns:
        The rank, 0 for an all-zero spectrum.
    """
    if not values.size or values[0] <= 0.0:
        return 0
    significant = values[values > RANK_TOLERANCE * values[0]]
    if significant.size <= cap:
        return int(significant.size)
    drops = np.log(significant[:cap]) - np.log(significant[1 : cap + 1])
    return int(np.argmax(drops) + 1)


def _refine(
    thetas: list[np.ndarray], data: np.ndarray, basis: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Alternating least squares on a fixed rank, starting from a column basis.

    Returns:
        The refined column basis U and the coefficient matrix C (estimate = U·C).
    """
    n, rank = basis.shape
    coefficients = np.zeros((rank, len(thetas)), dtype=complex)
    previous = None
    for _ in range(REFINE_ROUNDS):
        for col, theta in enumerate(thetas):
            coefficients[:, col] = np.linalg.lstsq(theta @ basis, data[:, col], rcond=None)[0]
        normal = np.zeros((n * rank, n * rank), dtype=complex)
        rhs = np.zeros(n * rank, dtype=complex)
        for col, theta in enumerate(thetas):
            gram = theta.conj().T @ theta
            weights = np.outer(coefficients[:, col].conj(), coefficients[:, col])
            normal += np.kron(weights, gram)
            rhs += np.outer(theta.conj().T @ data[:, col], coefficients[:, col].conj()).ravel(
                order="F"
            )
        basis = np.linalg.lstsq(normal, rhs, rcond=None)[0].reshape((n, rank), order="F")
        estimate = basis @ coefficients
        if previous is not None:
            scale = max(float(np.linalg.norm(previous)), np.finfo(float).tiny)
            if float(np.linalg.norm(estimate - previous)) <= 1e-12 * scale:
                break
        previous = estimate
    for col, theta in enumerate(thetas):
        coefficients[:, col] = np.linalg.lstsq(theta @ basis, data[:, col], rcond=None)[0]
    return basis, coefficients


@mathkit.map_linalg_exception
def complete_matrix(
    fc: FcMatrix, ops: typing.Sequence[MeasurementOp], cfg: CompletionConfig
) -> CompletionResult:
    """Estimate the n×J spectrum matrix from the observed compressed columns.

    Args:
        fc: Masked measurement matrix.
        ops: Measurement operator of every SU, indexed by SU.
        cfg: Solver settings.

    Returns:
        CompletionResult: estimate, flags and per-column residuals.

    Raises:
        DimensionMismatchError: if the operators do not match the matrix.
    """
    if len(ops) != fc.J:
        raise DimensionMismatchError(f"expected {fc.J} operators, got {len(ops)}")
    observed_ops = [ops[index] for index in fc.observed]
    if any(op.Lambda != fc.X.shape[0] for op in observed_ops):
        raise DimensionMismatchError("operator measurement counts differ from the matrix rows")
    n = observed_ops[0].n
    thetas = [op.Theta for op in observed_ops]
    data = fc.X[:, list(fc.observed)]
    estimate = np.zeros((n, fc.J), dtype=complex)
    if not np.any(data):
        return CompletionResult(estimate, True, False, 0, {j: 0.0 for j in fc.observed}, 0)

    if fc.J1 == fc.J and all(op.Lambda == op.n for op in observed_ops):
        observed_estimate = _invert_columns(observed_ops, data)
        converged, diverged, iterations = True, False, 0
        estimate[:, list(fc.observed)] = observed_estimate
    else:
        observed_estimate, iterations, converged, diverged = _threshold_iterations(
            thetas, data, cfg
        )
        left, values, _ = mathkit.svd(observed_estimate)
        rank = detect_rank(values, rank_cap(n, len(thetas), data.size))
        if rank and not diverged:
            basis, coefficients = _refine(thetas, data, left[:, :rank])
            observed_estimate = basis @ coefficients
            fill = basis @ coefficients.mean(axis=1)
        else:
            fill = np.zeros(n, dtype=complex)
        estimate[:, :] = fill[:, np.newaxis]
        estimate[:, list(fc.observed)] = observed_estimate

    misfit = _misfit(thetas, data, observed_estimate)
    residuals = {
        index: float(np.linalg.norm(misfit[:, col])) for col, index in enumerate(fc.observed)
    }
    if not converged and not diverged:
        relative = float(np.linalg.norm(misfit)) / float(np.linalg.norm(data))
        converged = relative <= cfg.tol
    if cfg.eps_vec is not None:
        if len(cfg.eps_vec) != fc.J1:
            raise DimensionMismatchError(
                f"expected {fc.J1} residual bounds, got {len(cfg.eps_vec)}"
            )
        converged = converged and all(
            residuals[index] <= bound for index, bound in zip(fc.observed, cfg.eps_vec)
        )
    if not converged:
        logger.warning("Completion stopped without meeting tol=%g", cfg.tol)
    _, final_values, _ = mathkit.svd(estimate)
    rank = int(np.count_nonzero(final_values > 1e-6 * final_values[0]))
    return CompletionResult(estimate, converged, diverged, iterations, residuals, rank)


def nuclear_norm(matrix: np.ndarray) -> float:
    """Return the sum of singular values.

    Args:
        matrix: 2-D array.

    Returns:
        The nuclear norm.
    """
    return float(np.sum(mathkit.svd(matrix)[1]))


def zero_filled_baseline(fc: FcMatrix, ops: typing.Sequence[MeasurementOp]) -> np.ndarray:
    """Minimum-norm least-squares column estimates, zero for unobserved columns.

    Args:
        fc: Masked measurement matrix.
        ops: Measurement operator of every SU.

    Returns:
        n×J baseline estimate.
    """
    n = ops[fc.observed[0]].n
    baseline = np.zeros((n, fc.J), dtype=complex)
    for index in fc.observed:
        baseline[:, index] = np.linalg.lstsq(ops[index].Theta, fc.column(index), rcond=None)[0]
    return baseline


def occupancy_from_matrix(
    estimate: np.ndarray, I: int, threshold: float  # noqa: E741
) -> np.ndarray:
    """Per-SU energy detection on the columns of a completed matrix.

    Args:
        estimate: n×J spectrum matrix estimate.
        I: Number of channels.
        threshold: Per-channel energy threshold.

    Returns:
        I×J boolean occupancy decisions.
    """
    return np.column_stack(
        [energy_detect(estimate[:, col], I, threshold) for col in range(estimate.shape[1])]
    )


def cs_sample_bound(n: float, K_eff: float, C_cs: float) -> int:
    """Minimum compressive measurement count ceil(C·K·ln(n/K)).

    Args:
        n: Nyquist sample count.
        K_eff: Sparsity in bins.
        C_cs: Instance constant.

    Returns:
        The bound.

    Raises:
        DomainError: unless n > K_eff >= 1.
    """
    if not 1.0 <= K_eff < n:
        raise DomainError(f"need n > K_eff >= 1, got n={n}, K_eff={K_eff}")
    return math.ceil(C_cs * K_eff * math.log(n / K_eff))


def mc_sample_bound(  # pylint: disable=too-many-arguments,too-many-positional-arguments
    n: int,
    J: int,
    K_eff: float,
    C_mc: float,
    mode: typing.Literal["theoretical", "practical"],
    ratio: float = 0.3,
) -> ObservationBound:
    """Minimum total observed measurements for exact completion.

    The theoretical bound is C·μ²·ν·K·(ln ν)⁶ with ν = max(n, J) and μ² = ln ν; it is far
    above n·J at the sizes simulated here, so the practical bound ceil(ratio·n·J) is the
    one that constrains designs.

    Args:
        n: Rows of the spectrum matrix.
        J: Columns of the spectrum matrix.
        K_eff: Sparsity in bins.
        C_mc: Constant of the theoretical bound.
        mode: "theoretical" or "practical".
        ratio: Observed share of the matrix in practical mode.

    Returns:
        ObservationBound: the count and whether it exceeds n·J.

    Raises:
        DomainError: on sizes below 1 or an unknown mode.
    """
    if n < 1 or J < 1:
        raise DomainError(f"need n, J >= 1, got n={n}, J={J}")
    if mode == "theoretical":
        nu = max(n, J)
        log_nu = math.log(nu)
        count = math.ceil(C_mc * log_nu * nu * K_eff * log_nu**6)
    elif mode == "practical":
        count = math.ceil(ratio * n * J)
    else:
        raise DomainError(f"unknown bound mode {mode!r}")
    return ObservationBound(count=count, exceeds_matrix=count > n * J)
