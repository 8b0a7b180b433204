# Copyright 2024 Canonical Ltd.
# See LICENSE file for licensing details.

"""Special-function, sampling and dense linear-algebra kernels."""

import functools
import logging
import math
import typing

import numpy as np
from pydantic import Field
from pydantic.dataclasses import dataclass
from scipy import special

from exception import DomainError, NumericalFailureError

logger = logging.getLogger(__name__)

UINT64_MAX = 2**64 - 1
SQRT2 = math.sqrt(2.0)

ArrayOrFloat = typing.Union[float, np.ndarray]


@dataclass(frozen=True)
class Rng:
    """A seed-keyed random stream.

    Two instances with the same (base_seed, stream_id) produce the same draws; the
    stream derivation is counter based, so streams can be created in any order.

    Attributes:
        base_seed: Experiment-wide seed.
        stream_id: Identifier of this stream (trial, chunk, SU or sweep point).
    """

    base_seed: int = Field(ge=0, le=UINT64_MAX)
    stream_id: int = Field(default=0, ge=0, le=UINT64_MAX)

    def generator(self) -> np.random.Generator:
        """Build the numpy generator owned by this stream.

        Returns:
            A Philox-backed generator seeded from (base_seed, stream_id).
        """
        seed_sequence = np.random.SeedSequence(self.base_seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.Philox(seed_sequence))

    def child(self, index: int) -> "Rng":
        """Derive the stream of a sub-task.

        Args:
            index: Index of the sub-task (chunk, trial or sweep point).

        Returns:
            A new stream with a hashed stream id.
        """
        derived = np.random.SeedSequence(self.stream_id, spawn_key=(index,)).generate_state(
            1, dtype=np.uint64
        )[0]
        return Rng(base_seed=self.base_seed, stream_id=int(derived))


def map_linalg_exception(func: typing.Callable) -> typing.Callable:
    """Remap numpy LinAlgError to NumericalFailureError.

    Args:
        func: function to be wrapped.

    Returns:
        A wrapped function.
    """

    @functools.wraps(func)
    def wrapper(*args: typing.Any, **kwargs: typing.Any) -> typing.Any:
        """Remap numpy LinAlgError to NumericalFailureError.

        Args:
            args: function arguments.
            kwargs: function keyword arguments.

        Returns:
            The function return value.

        Raises:
            NumericalFailureError: if a dense kernel failed to converge.
        """
        try:
            return func(*args, **kwargs)
        except np.linalg.LinAlgError as exc:
            logger.error("Dense linear algebra failed in %s: %s", func.__name__, exc)
            raise NumericalFailureError(f"{func.__name__}: {exc}") from exc

    return wrapper


def as_output(value: np.ndarray) -> ArrayOrFloat:
    """Unwrap zero-dimensional results into Python floats."""
    if np.ndim(value) == 0:
        return float(value)
    return value


def q_function(x: ArrayOrFloat) -> ArrayOrFloat:
    """Gaussian tail probability Q(x) = P(N(0, 1) > x).

    Args:
        x: Argument, scalar or array.

    Returns:
        Q(x), same shape as x.

    Raises:
        DomainError: if x is not finite.
    """
    values = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(values)):
        raise DomainError(f"q_function needs a finite argument, got {x!r}")
    return as_output(0.5 * special.erfc(values / SQRT2))


def q_inverse(p: ArrayOrFloat) -> ArrayOrFloat:
    """Inverse of the Gaussian tail probability.

    Args:
        p: Probability in (0, 1), scalar or array.

    Returns:
        x with Q(x) = p.

    Raises:
        DomainError: if p is outside (0, 1).
    """
    values = np.asarray(p, dtype=float)
    if not np.all((values > 0.0) & (values < 1.0)):
        raise DomainError(f"q_inverse needs 0 < p < 1, got {p!r}")
    return as_output(-special.ndtri(values))


def upper_incomplete_gamma(a: ArrayOrFloat, z: ArrayOrFloat) -> ArrayOrFloat:
    """Non-regularized upper incomplete gamma function.

    Γ(a, z) = ∫_z^∞ t^(a-1) e^(-t) dt, evaluated as Q(a, z)·Γ(a) where the regularized
    Q(a, z) switches between the lower series and the continued fraction at z = a + 1.

    Args:
        a: Shape, positive.
        z: Lower integration limit, nonnegative.

    Returns:
        Γ(a, z), broadcast over the arguments.

    Raises:
        DomainError: if a <= 0 or z < 0.
    """
    shape = np.asarray(a, dtype=float)
    limit = np.asarray(z, dtype=float)
    if not np.all(shape > 0.0):
        raise DomainError(f"upper_incomplete_gamma needs a > 0, got {a!r}")
    if not np.all(limit >= 0.0):
        raise DomainError(f"upper_incomplete_gamma needs z >= 0, got {z!r}")
    return as_output(special.gammaincc(shape, limit) * np.exp(special.gammaln(shape)))


def erlang_cdf(x: ArrayOrFloat, M: int) -> ArrayOrFloat:
    """CDF of the Erlang(M, 1) channel gain, 1 - e^(-x) Σ_{m<M} x^m/m!.

    Args:
        x: Evaluation points.
        M: Number of antennas.

    Returns:
        The CDF at x (0 for negative x).

    Raises:
        DomainError: if M < 1.
    """
    if M < 1:
        raise DomainError(f"erlang_cdf needs M >= 1, got {M}")
    values = np.clip(np.asarray(x, dtype=float), 0.0, None)
    return as_output(special.gammainc(M, values))


def sample_poisson(mean: float, rng: np.random.Generator) -> int:
    """Draw a Poisson count.

    Args:
        mean: Poisson mean.
        rng: Random stream.

    Returns:
        The count.

    Raises:
        DomainError: if the mean is negative or not finite.
    """
    if not math.isfinite(mean) or mean < 0.0:
        raise DomainError(f"sample_poisson needs a finite mean >= 0, got {mean}")
    return int(rng.poisson(mean))


def sample_channel_gain(
    M: int, rng: np.random.Generator, size: int | tuple[int, ...] | None = None
) -> ArrayOrFloat:
    """Draw ‖h‖² for an M-antenna MRT link (sum of M unit-mean exponentials).

    Args:
        M: Number of antennas.
        rng: Random stream.
        size: Optional output shape for bulk draws.

    Returns:
        One gain, or an array of gains when size is given.

    Raises:
        DomainError: if M < 1.
    """
    if M < 1:
        raise DomainError(f"sample_channel_gain needs M >= 1, got {M}")
    draws = rng.gamma(shape=float(M), scale=1.0, size=size)
    if size is None:
        return float(draws)
    return draws


@map_linalg_exception
def svd(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Thin singular value decomposition A = U·diag(s)·Vᴴ.

    Args:
        matrix: Real or complex 2-D array.

    Returns:
        (U, s, V) with s descending and V (not Vᴴ) holding the right singular vectors.

    Raises:
        DomainError: if the matrix has non-finite entries or is not 2-D.
    """
    values = np.asarray(matrix)
    if values.ndim != 2:
        raise DomainError(f"svd needs a 2-D matrix, got shape {values.shape}")
    if not np.all(np.isfinite(values)):
        raise DomainError("svd needs finite entries")
    left, singular_values, right_h = np.linalg.svd(values, full_matrices=False)
    return left, singular_values, right_h.conj().T


def dbm_to_watt(value: ArrayOrFloat) -> ArrayOrFloat:
    """Convert a power in dBm to W.

    Args:
        value: Power in dBm.

    Returns:
        Power in W.
    """
    return as_output(10.0 ** ((np.asarray(value, dtype=float) - 30.0) / 10.0))


def watt_to_dbm(value: ArrayOrFloat) -> ArrayOrFloat:
    """Convert a positive power in W to dBm.

    Args:
        value: Power in W.

    Returns:
        Power in dBm.

    Raises:
        DomainError: if the power is not positive.
    """
    values = np.asarray(value, dtype=float)
    if not np.all(values > 0.0):
        raise DomainError(f"watt_to_dbm needs a positive power, got {value!r}")
    return as_output(10.0 * np.log10(values) + 30.0)
