# Copyright 2024 Canonical Ltd.
# See LICENSE file for licensing details.

"""Wideband compressive spectrum sensing with energy detection."""

import dataclasses
import functools
import logging
import math
import typing

import numpy as np
from scipy import special

import mathkit
from exception import DimensionMismatchError, DomainError, InfeasibleSensingError
from state.sensing import SpectrumScene

logger = logging.getLogger(__name__)

DEFAULT_MAX_ITER = 100


@dataclasses.dataclass(frozen=True)
class MeasurementOp:
    """Compressive measurement operator of one SU.

    Attributes:
        Lambda: Number of measurements round(κn).
        Phi: Λ×n real sampling matrix applied to time samples.
        Theta: Λ×n complex matrix Φ·F⁻¹ applied to spectrum bins.
    """

    Lambda: int
    Phi: np.ndarray
    Theta: np.ndarray

    @property
    def n(self) -> int:
        """Return the Nyquist sample count."""
        return int(self.Phi.shape[1])

    @property
    def is_identity(self) -> bool:
        """Return whether the operator keeps every Nyquist sample."""
        return self.Lambda == self.n and bool(np.array_equal(self.Phi, np.eye(self.n)))

    @functools.cached_property
    def Theta_pinv(self) -> np.ndarray:  # noqa: N802
        """Return the n×Λ Moore–Penrose pseudo-inverse of Θ."""
        return np.linalg.pinv(self.Theta)

    @property
    def kappa(self) -> float:
        """Return the realized compression ratio Λ/n."""
        return self.Lambda / self.n


class RecoveryResult(typing.NamedTuple):
    """Outcome of sparse recovery.

    Attributes:
        estimate: n-bin spectrum estimate.
        residual: ‖Θ·ŝ - x‖₂.
        iterations: Pursuit iterations spent.
        converged: Whether the residual bound was met.
    """

    estimate: np.ndarray
    residual: float
    iterations: int
    converged: bool


def draw_scene(  # pylint: disable=too-many-arguments,too-many-positional-arguments
    I: int,  # noqa: E741
    K: int,
    n: int,
    snr: float,
    sigma2: float,
    rng: np.random.Generator,
) -> SpectrumScene:
    """Draw a scene with K occupied channels chosen uniformly at random.

    Args:
        I: Number of channels.
        K: Number of occupied channels.
        n: Nyquist samples per window.
        snr: σ_s²/σ².
        sigma2: Noise power.
        rng: Random stream.

    Returns:
        SpectrumScene: the scene.
    """
    occupied = tuple(sorted(int(channel) for channel in rng.choice(I, size=K, replace=False)))
    return SpectrumScene(I=I, occupied=occupied, n=n, sigma_s2=snr * sigma2, sigma2=sigma2)


def _complex_normal(power: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Draw circularly-symmetric complex Gaussian samples of the given power."""
    return math.sqrt(power / 2.0) * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


def synthesize_received(
    scene: SpectrumScene, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Synthesize the received samples of one sensing window.

    Occupied channels carry complex Gaussian signal of per-bin power σ_s²·I/K; every bin
    carries noise of power σ². The time samples are the unitary inverse DFT of the noisy
    spectrum.

    Args:
        scene: Occupancy ground truth.
        rng: Random stream.

    Returns:
        (r_time, s_freq): received time samples and the noiseless signal spectrum.
    """
    bins = scene.bins_per_channel
    s_freq = np.zeros(scene.n, dtype=complex)
    if scene.K:
        per_bin = scene.sigma_s2 * scene.I / scene.K
        for channel in scene.occupied:
            s_freq[channel * bins : (channel + 1) * bins] = _complex_normal(per_bin, bins, rng)
    noise = _complex_normal(scene.sigma2, scene.n, rng)
    r_time = np.fft.ifft(s_freq + noise, norm="ortho")
    return r_time, s_freq


def measurement_op(n: int, kappa: float, rng: np.random.Generator) -> MeasurementOp:
    """Build a Gaussian measurement operator keeping round(κn) measurements.

    κ = 1 keeps every sample with Φ = I; otherwise Φ has i.i.d. N(0, 1/Λ) entries.

    Args:
        n: Nyquist sample count.
        kappa: Compression ratio in (0, 1].
        rng: Random stream.

    Returns:
        MeasurementOp: the operator.

    Raises:
        DomainError: if kappa is outside (0, 1] or n < 1.
    """
    if not 0.0 < kappa <= 1.0 or n < 1:
        raise DomainError(f"need n >= 1 and 0 < kappa <= 1, got n={n}, kappa={kappa}")
    count = max(1, int(round(kappa * n)))
    if count == n:
        phi = np.eye(n)
    else:
        phi = rng.standard_normal((count, n)) / math.sqrt(count)
    # F⁻¹ is symmetric, so Φ·F⁻¹ is the row-wise inverse DFT of Φ.
    theta = np.fft.ifft(phi, axis=1, norm="ortho")
    return MeasurementOp(Lambda=count, Phi=phi, Theta=theta)


def compress(r_time: np.ndarray, op: MeasurementOp) -> np.ndarray:
    """Apply x = Φ·r.

    Args:
        r_time: n time samples.
        op: Measurement operator.

    Returns:
        Λ compressed measurements.

    Raises:
        DimensionMismatchError: if r_time does not have n samples.
    """
    if np.shape(r_time) != (op.n,):
        raise DimensionMismatchError(f"expected {op.n} samples, got shape {np.shape(r_time)}")
    return op.Phi @ r_time


def _top_indices(values: np.ndarray, count: int) -> np.ndarray:
    """Indices of the `count` largest magnitudes, ties broken by lower index."""
    return np.argsort(-np.abs(values), kind="stable")[:count]


@mathkit.map_linalg_exception
def cs_recover(
    x: np.ndarray,
    op: MeasurementOp,
    sparsity_budget: int,
    eps: float,
    max_iter: int = DEFAULT_MAX_ITER,
) -> RecoveryResult:
    """Recover a sparse spectrum from compressed measurements.

    Square operators are inverted directly. Otherwise CoSaMP runs: merge the 2k largest
    proxy entries with the current support, solve least squares on the merged support,
    prune to k entries, stop once ‖Θ·ŝ - x‖ <= eps. The best iterate is returned when the
    bound is never met.

    Args:
        x: Λ measurements.
        op: Measurement operator.
        sparsity_budget: Number of nonzero bins kept (k).
        eps: Residual bound.
        max_iter: Iteration cap.

    Returns:
        RecoveryResult: estimate, residual, iterations and convergence flag.

    Raises:
        DomainError: if the sparsity budget is below 1.
        DimensionMismatchError: if x does not hold Λ measurements.
    """
    if sparsity_budget < 1:
        raise DomainError(f"sparsity_budget must be >= 1, got {sparsity_budget}")
    if np.shape(x) != (op.Lambda,):
        raise DimensionMismatchError(f"expected {op.Lambda} measurements, got {np.shape(x)}")
    norm_x = float(np.linalg.norm(x))
    if norm_x == 0.0:
        return RecoveryResult(np.zeros(op.n, dtype=complex), 0.0, 0, True)
    if op.is_identity:
        estimate = np.fft.fft(x, norm="ortho")
        residual = float(np.linalg.norm(op.Theta @ estimate - x))
        return RecoveryResult(estimate, residual, 0, True)
    if op.Lambda == op.n:
        estimate = np.linalg.solve(op.Theta, x)
        residual = float(np.linalg.norm(op.Theta @ estimate - x))
        return RecoveryResult(estimate, residual, 0, True)
    if op.Lambda < 2 * sparsity_budget:
        logger.warning(
            "Only %d measurements for a sparsity budget of %d", op.Lambda, sparsity_budget
        )
    return _cosamp(x, op.Theta, sparsity_budget, eps, max_iter)


def _cosamp(
    x: np.ndarray, theta: np.ndarray, k: int, eps: float, max_iter: int
) -> RecoveryResult:
    """Run CoSaMP iterations and keep the best iterate."""
    n = theta.shape[1]
    theta_h = theta.conj().T
    estimate = np.zeros(n, dtype=complex)
    residual_vec = x.copy()
    best = RecoveryResult(estimate, float(np.linalg.norm(x)), 0, False)
    previous = best.residual
    for iteration in range(1, max_iter + 1):
        proxy = theta_h @ residual_vec
        candidates = np.union1d(_top_indices(proxy, 2 * k), np.flatnonzero(estimate))
        coefficients, *_ = np.linalg.lstsq(theta[:, candidates], x, rcond=None)
        keep = _top_indices(coefficients, k)
        estimate = np.zeros(n, dtype=complex)
        estimate[candidates[keep]] = coefficients[keep]
        residual_vec = x - theta @ estimate
        residual = float(np.linalg.norm(residual_vec))
        if residual < best.residual:
            best = RecoveryResult(estimate, residual, iteration, residual <= eps)
        if residual <= eps:
            return RecoveryResult(estimate, residual, iteration, True)
        if abs(previous - residual) <= 1e-12 * best.residual:
            break
        previous = residual
    logger.debug("CoSaMP stopped at residual %g above eps %g", best.residual, eps)
    return best


@mathkit.map_linalg_exception
def least_norm_recover(x: np.ndarray, op: MeasurementOp) -> RecoveryResult:
    """Minimum-norm spectrum consistent with the measurements, ŝ = Θ⁺·x.

    No sparsity is imposed, so noise-only bins keep their energy. In the Fourier basis ŝ
    is the projection of the received spectrum onto the row space of Φ.

    Args:
        x: Λ measurements.
        op: Measurement operator.

    Returns:
        RecoveryResult: the estimate, its residual and converged=True.

    Raises:
        DimensionMismatchError: if x does not hold Λ measurements.
    """
    if np.shape(x) != (op.Lambda,):
        raise DimensionMismatchError(f"expected {op.Lambda} measurements, got {np.shape(x)}")
    if op.is_identity:
        estimate = np.fft.fft(x, norm="ortho")
    else:
        estimate = op.Theta_pinv @ x
    residual = float(np.linalg.norm(op.Theta @ estimate - x))
    return RecoveryResult(estimate, residual, 0, True)


def recovered_noise_floor(kappa: float, sigma2: float, sigma_s2: float) -> float:
    """Expected power of a noise-only bin after least-norm recovery, κ·(σ² + (1-κ)·σ_s²).

    The projection keeps a κ share of every bin's own power and leaks a κ(1-κ)/n share of
    each other bin's power into it; σ_s² is the per-sample signal power over the band.

    Args:
        kappa: Compression ratio Λ/n in (0, 1].
        sigma2: Noise power.
        sigma_s2: Signal power.

    Returns:
        The noise floor; σ² at κ = 1.

    Raises:
        DomainError: on any argument outside its domain.
    """
    if not 0.0 < kappa <= 1.0 or sigma2 <= 0.0 or sigma_s2 < 0.0:
        raise DomainError(
            f"need 0 < kappa <= 1, sigma2 > 0, sigma_s2 >= 0; got {kappa}, {sigma2}, {sigma_s2}"
        )
    return kappa * (sigma2 + (1.0 - kappa) * sigma_s2)


def detection_threshold(
    Pd_target: float, n_eff: float, sigma_s2: float, sigma2: float
) -> float:
    """Energy threshold λ = (σ_s² + σ²)(1 + Q⁻¹(P̄_d)/√(n/2)).

    Args:
        Pd_target: Target detection probability in (0.5, 1).
        n_eff: Real-valued samples averaged by the detector.
        sigma_s2: Signal power.
        sigma2: Noise power.

    Returns:
        The threshold in power units.

    Raises:
        DomainError: on any argument outside its domain.
    """
    if not 0.5 < Pd_target < 1.0:
        raise DomainError(f"Pd_target must lie in (0.5, 1), got {Pd_target}")
    if n_eff < 2 or sigma_s2 < 0.0 or sigma2 <= 0.0:
        raise DomainError(
            f"need n_eff >= 2, sigma_s2 >= 0, sigma2 > 0; got {n_eff}, {sigma_s2}, {sigma2}"
        )
    quantile = float(mathkit.q_inverse(Pd_target))
    return (sigma_s2 + sigma2) * (1.0 + quantile / math.sqrt(n_eff / 2.0))


def channel_statistics(estimate: np.ndarray, I: int) -> np.ndarray:  # noqa: E741
    """Average recovered power of each channel.

    Args:
        estimate: n-bin spectrum estimate.
        I: Number of channels.

    Returns:
        Length-I vector of mean |ŝ|² over each channel's bins.

    Raises:
        DimensionMismatchError: if the bins do not split evenly into channels.
    """
    if np.size(estimate) % I:
        raise DimensionMismatchError(f"{np.size(estimate)} bins do not split into {I} channels")
    return np.mean(np.abs(np.reshape(estimate, (I, -1))) ** 2, axis=1)


def energy_detect(estimate: np.ndarray, I: int, threshold: float) -> np.ndarray:  # noqa: E741
    """Flag each channel whose average recovered power exceeds the threshold.

    Args:
        estimate: n-bin spectrum estimate.
        I: Number of channels.
        threshold: Energy threshold λ.

    Returns:
        Boolean occupancy decisions of length I.
    """
    return channel_statistics(estimate, I) > threshold


def channel_threshold(pf_target: float, bins_per_channel: int, noise_floor: float) -> float:
    """Per-channel threshold whose noise-only false-alarm rate is exactly pf_target.

    A noise-only channel averages bins_per_channel complex Gaussian bins, so its statistic
    is noise_floor·Γ(b, 1)/b and λ = noise_floor·Γ⁻¹(b, pf_target)/b with the inverse of
    the regularized upper incomplete gamma function.

    Args:
        pf_target: False-alarm rate in [0, 1]; zero gives an infinite threshold.
        bins_per_channel: n / I.
        noise_floor: Power of a noise-only bin of the detected spectrum.

    Returns:
        The threshold λ.

    Raises:
        DomainError: on any argument outside its domain.
    """
    if not 0.0 <= pf_target <= 1.0 or bins_per_channel < 1 or noise_floor <= 0.0:
        raise DomainError(
            "need 0 <= pf_target <= 1, bins_per_channel >= 1, noise_floor > 0; "
            f"got {pf_target}, {bins_per_channel}, {noise_floor}"
        )
    quantile = float(special.gammainccinv(bins_per_channel, pf_target))
    return noise_floor * quantile / bins_per_channel


def sample_count(beta: float, T: float, Ps: float, e_s: float) -> int:
    """Nyquist samples funded by the sensing slot, floor(β·T·Ps/e_s).

    Args:
        beta: Sensing fraction.
        T: Frame length in s.
        Ps: Sensing power in W.
        e_s: Energy per sample in J.

    Returns:
        The sample count.

    Raises:
        DomainError: if an argument is not positive.
        InfeasibleSensingError: if the slot funds less than one sample.
    """
    if beta < 0.0 or T <= 0.0 or Ps <= 0.0 or e_s <= 0.0:
        raise DomainError(f"need beta >= 0 and positive T, Ps, e_s; got {beta}, {T}, {Ps}, {e_s}")
    # Rounds away 999.999... left by floating-point products of integral values.
    count = math.floor(beta * T * Ps / e_s * (1.0 + 1e-12))
    if count < 1:
        raise InfeasibleSensingError(f"sensing slot funds {beta * T * Ps / e_s:g} samples")
    return count


def _false_alarm(
    Pd_target: float, snr: mathkit.ArrayOrFloat, samples: mathkit.ArrayOrFloat
) -> mathkit.ArrayOrFloat:
    """Q(Q⁻¹(P̄_d)·√(1+snr) + √(samples/2)·snr)."""
    snr_values = np.asarray(snr, dtype=float)
    sample_values = np.asarray(samples, dtype=float)
    if np.any(snr_values < 0.0):
        raise DomainError(f"snr must be >= 0, got {snr!r}")
    if np.any(sample_values < 2.0):
        raise DomainError(f"sample count must be >= 2, got {samples!r}")
    quantile = float(mathkit.q_inverse(Pd_target))
    argument = quantile * np.sqrt(1.0 + snr_values) + np.sqrt(sample_values / 2.0) * snr_values
    return mathkit.q_function(argument)


def pf_analytic(
    Pd_target: float, snr: mathkit.ArrayOrFloat, n: mathkit.ArrayOrFloat
) -> mathkit.ArrayOrFloat:
    """Single-SU false-alarm probability at the calibrated threshold.

    Pf = Q(Q⁻¹(P̄_d)·√(1+snr) + √(n/2)·snr). Variants printed with a (1+snr) factor or an
    outer complement are not used.

    Args:
        Pd_target: Target detection probability.
        snr: Signal-to-noise ratio.
        n: Nyquist-equivalent sample count.

    Returns:
        Pf, broadcast over snr and n.
    """
    return _false_alarm(Pd_target, snr, n)


def qf_analytic(
    Pd_target: float,
    snr: mathkit.ArrayOrFloat,
    n: mathkit.ArrayOrFloat,
    J: int,
    channel_gains: typing.Optional[typing.Sequence[complex]] = None,
) -> mathkit.ArrayOrFloat:
    """Cooperative false-alarm probability of J reporting SUs.

    With unit channels Qf = Q(Q⁻¹(P̄_d)·√(1+snr) + √(nJ/2)·snr). With per-SU channel gains
    h_j and H = Σ|h_j|², Qf = Q(Q⁻¹(P̄_d)·√(1 + snr·H/J) + √(n/(2J))·snr·H).

    Args:
        Pd_target: Target detection probability.
        snr: Signal-to-noise ratio.
        n: Nyquist-equivalent samples per SU.
        J: Number of SUs.
        channel_gains: Optional complex channel coefficients, one per SU.

    Returns:
        Qf.

    Raises:
        DomainError: if J < 1 or the gains do not match J.
    """
    if J < 1:
        raise DomainError(f"J must be >= 1, got {J}")
    if channel_gains is None:
        return _false_alarm(Pd_target, snr, np.asarray(n, dtype=float) * J)
    if len(channel_gains) != J:
        raise DomainError(f"expected {J} channel gains, got {len(channel_gains)}")
    total_gain = float(np.sum(np.abs(np.asarray(channel_gains)) ** 2))
    snr_values = np.asarray(snr, dtype=float)
    samples = np.asarray(n, dtype=float)
    if np.any(snr_values < 0.0) or np.any(samples < 2.0):
        raise DomainError("need snr >= 0 and n >= 2")
    quantile = float(mathkit.q_inverse(Pd_target))
    argument = quantile * np.sqrt(1.0 + snr_values * total_gain / J) + np.sqrt(
        samples / (2.0 * J)
    ) * snr_values * total_gain
    return mathkit.q_function(argument)


def pf_from_threshold(
    threshold: float, n_eff: float, sigma2: float
) -> float:
    """False-alarm rate of a fixed threshold on noise-only input, Q((λ/σ² - 1)·√(n/2)).

    Args:
        threshold: Energy threshold λ.
        n_eff: Real-valued samples averaged by the detector.
        sigma2: Noise power.

    Returns:
        The false-alarm probability under the Gaussian approximation.
    """
    return float(mathkit.q_function((threshold / sigma2 - 1.0) * math.sqrt(n_eff / 2.0)))


class SensingOutcome(typing.NamedTuple):
    """Per-window result of the sensing pipeline.

    Attributes:
        decisions: Occupancy decision per channel.
        recovery: Sparse recovery result.
    """

    decisions: np.ndarray
    recovery: RecoveryResult


def sense_scene(
    scene: SpectrumScene,
    op: MeasurementOp,
    threshold: float,
    rng: np.random.Generator,
    sparsity_budget: typing.Optional[int] = None,
    method: typing.Literal["sparse", "least_norm"] = "sparse",
) -> SensingOutcome:
    """Run synthesize, compress, recover and detect for one window.

    Args:
        scene: Occupancy ground truth.
        op: Measurement operator.
        threshold: Per-channel energy threshold.
        rng: Random stream.
        sparsity_budget: Bins kept by sparse recovery; K·n/I (at least one channel) by default.
        method: "sparse" runs cs_recover, "least_norm" runs least_norm_recover.

    Returns:
        SensingOutcome: decisions and the recovery result.
    """
    budget = sparsity_budget or max(scene.K, 1) * scene.bins_per_channel
    r_time, _ = synthesize_received(scene, rng)
    x = compress(r_time, op)
    if method == "least_norm":
        recovery = least_norm_recover(x, op)
    else:
        recovery = cs_recover(x, op, budget, eps=math.sqrt(op.Lambda * scene.sigma2))
    if not recovery.converged:
        logger.debug("Recovery did not reach its residual bound (%g)", recovery.residual)
    return SensingOutcome(energy_detect(recovery.estimate, scene.I, threshold), recovery)
