# Copyright 2024 Canonical Ltd.
# See LICENSE file for licensing details.

"""Parameter components of the wireless power transfer model."""

import dataclasses
import math

import numpy as np
from pydantic import Field, model_validator
from pydantic.dataclasses import dataclass

SPEED_OF_LIGHT = 299_792_458.0
DEFAULT_CARRIER_HZ = 900e6
# Slack used when checking closed constraints on sums of fractions.
SLOT_TOLERANCE = 1e-12


def path_loss_constant(carrier_hz: float) -> float:
    """Free-space path-loss constant (c / (4πf))² at the 1 m reference distance.

    Args:
        carrier_hz: Carrier frequency of the power transfer link.

    Returns:
        The dimensionless constant A.
    """
    return (SPEED_OF_LIGHT / (4.0 * math.pi * carrier_hz)) ** 2


@dataclass(frozen=True)
class WptParams:
    """Power-beacon field and path-loss constants.

    Attributes:
        lambda_p: Beacon density, beacons per m².
        M: Antennas per beacon.
        Pp: Beacon transmit power in W.
        eta: RF-to-DC conversion efficiency.
        A: Path-loss constant at 1 m.
        xi: Path-loss exponent.
        d0: Protection-zone radius in m.
    """

    lambda_p: float = Field(ge=0)
    M: int = Field(ge=1)
    Pp: float = Field(gt=0)
    eta: float = Field(gt=0, le=1)
    A: float = Field(default_factory=lambda: path_loss_constant(DEFAULT_CARRIER_HZ), gt=0)
    xi: float = Field(default=2.0, ge=2)
    d0: float = Field(default=1.0, ge=1)

    @property
    def delta(self) -> float:
        """Return 2/ξ."""
        return 2.0 / self.xi


@dataclass(frozen=True)
class FrameSplit:
    """Four-slot frame allocation.

    The sensing slot lasts κβ of the frame once compressive sampling is used, so the
    slot constraint reads alpha1 + kappa·beta + alpha2 <= 1.

    Attributes:
        alpha1: First harvest slot fraction.
        beta: Nyquist-equivalent sensing fraction.
        alpha2: Second harvest slot fraction.
        kappa: Compression ratio.
        T: Frame length in s.
    """

    alpha1: float = Field(ge=0, le=1)
    beta: float = Field(ge=0, le=1)
    alpha2: float = Field(ge=0, le=1)
    kappa: float = Field(default=1.0, gt=0, le=1)
    T: float = Field(default=1.0, gt=0)

    @model_validator(mode="after")
    def check_slots_fit(self) -> "FrameSplit":
        """Validate that the slots fit in the frame.

        Returns:
            The validated frame split.

        Raises:
            ValueError: if alpha1 + kappa·beta + alpha2 exceeds one.
        """
        if self.alpha1 + self.kappa * self.beta + self.alpha2 > 1.0 + SLOT_TOLERANCE:
            raise ValueError("alpha1 + kappa*beta + alpha2 must not exceed 1")
        return self

    @property
    def sensing(self) -> float:
        """Return the sensing time fraction κβ."""
        return self.kappa * self.beta

    @property
    def transmission(self) -> float:
        """Return the data transmission fraction 1 - α1 - κβ - α2."""
        return max(0.0, 1.0 - self.alpha1 - self.sensing - self.alpha2)


@dataclass(frozen=True)
class PowerThresholds:
    """Power levels of an SU.

    Attributes:
        Ps: Sensing power in W. Zero is accepted and makes the sensing threshold μ_s
            vanish; optimization problems require a positive Ps.
        Pt: Transmit power in W.
        Pt_min: Lower transmit power bound in W.
        Pt_max: Upper transmit power bound in W.
        N0: Noise power of the data link in W.
    """

    Ps: float = Field(ge=0)
    Pt: float = Field(gt=0)
    Pt_min: float = Field(gt=0)
    Pt_max: float = Field(gt=0)
    N0: float = Field(gt=0)

    @model_validator(mode="after")
    def check_transmit_bounds(self) -> "PowerThresholds":
        """Validate Pt_min <= Pt <= Pt_max.

        Returns:
            The validated thresholds.

        Raises:
            ValueError: if the transmit power lies outside its bounds.
        """
        if self.Pt_min > self.Pt_max:
            raise ValueError("Pt_min must not exceed Pt_max")
        tolerance = SLOT_TOLERANCE * self.Pt_max
        if not self.Pt_min - tolerance <= self.Pt <= self.Pt_max + tolerance:
            raise ValueError("Pt must lie within [Pt_min, Pt_max]")
        return self


@dataclasses.dataclass(frozen=True)
class PbDraw:
    """One realization of the beacon field around an SU.

    Attributes:
        distances: Beacon distances in m, each at least d0.
        gains: Channel power gains ‖h_p‖², aligned with distances.
    """

    distances: np.ndarray
    gains: np.ndarray

    def __post_init__(self) -> None:
        """Validate that distances and gains are aligned.

        Raises:
            ValueError: if the arrays have different lengths.
        """
        if np.shape(self.distances) != np.shape(self.gains):
            raise ValueError("distances and gains must have the same length")

    @property
    def count(self) -> int:
        """Return the number of beacons in the draw."""
        return int(np.size(self.distances))
