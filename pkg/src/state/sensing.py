# Copyright 2024 Canonical Ltd.
# See LICENSE file for licensing details.

"""Parameter components of the spectrum sensing model."""

from pydantic import Field, model_validator
from pydantic.dataclasses import dataclass


@dataclass(frozen=True)
class SpectrumScene:
    """Wideband occupancy ground truth.

    Attributes:
        I: Number of channels.
        occupied: Indices of the occupied channels.
        n: Nyquist samples per sensing window.
        sigma_s2: Aggregate primary-user signal power σ_s².
        sigma2: Noise power σ².
    """

    I: int = Field(ge=1)  # noqa: E741
    occupied: tuple[int, ...] = Field()
    n: int = Field(ge=1)
    sigma_s2: float = Field(ge=0)
    sigma2: float = Field(gt=0)

    @model_validator(mode="after")
    def check_geometry(self) -> "SpectrumScene":
        """Validate channel indices and the bin partition.

        Returns:
            The validated scene.

        Raises:
            ValueError: if channels repeat, fall out of range or bins do not partition.
        """
        if len(set(self.occupied)) != len(self.occupied):
            raise ValueError("occupied channels must be distinct")
        if any(not 0 <= channel < self.I for channel in self.occupied):
            raise ValueError("occupied channel index out of range")
        if self.n % self.I:
            raise ValueError("n must be divisible by the channel count I")
        return self

    @property
    def K(self) -> int:  # noqa: N802
        """Return the number of occupied channels."""
        return len(self.occupied)

    @property
    def bins_per_channel(self) -> int:
        """Return n / I."""
        return self.n // self.I

    @property
    def snr(self) -> float:
        """Return σ_s² / σ²."""
        return self.sigma_s2 / self.sigma2


@dataclass(frozen=True)
class SensingParams:
    """Sensing budget and detection targets.

    Attributes:
        e_s: Energy per Nyquist sample in J.
        Pd_target: Target detection probability.
        C_cs: Constant of the compressive sample bound.
    """

    e_s: float = Field(default=2.5e-7, gt=0)
    Pd_target: float = Field(default=0.9, gt=0.5, lt=1)
    C_cs: float = Field(default=2.0, gt=0)
