# Copyright 2024 Canonical Ltd.
# See LICENSE file for licensing details.

"""Design tuples and the frame design problem definition."""

import typing

import numpy as np
from pydantic import Field, model_validator
from pydantic.dataclasses import dataclass

from .sensing import SensingParams
from .wpt import FrameSplit, PowerThresholds, WptParams

Variant = typing.Literal["p0", "p1"]
BoundMode = typing.Literal["theoretical", "practical"]


@dataclass(frozen=True)
class DesignTuple:
    """Decision vector of the frame design problem.

    Attributes:
        alpha1: First harvest slot fraction.
        beta: Nyquist-equivalent sensing fraction.
        alpha2: Second harvest slot fraction.
        Pt: Transmit power in W.
    """

    alpha1: float
    beta: float
    alpha2: float
    Pt: float

    def as_array(self) -> np.ndarray:
        """Return (alpha1, beta, alpha2, Pt) as a float vector."""
        return np.array([self.alpha1, self.beta, self.alpha2, self.Pt], dtype=float)

    @classmethod
    def from_array(cls, values: typing.Sequence[float]) -> "DesignTuple":
        """Build a tuple from a 4-vector.

        Args:
            values: (alpha1, beta, alpha2, Pt).

        Returns:
            DesignTuple: the design tuple.
        """
        alpha1, beta, alpha2, transmit_power = (float(value) for value in values)
        return cls(alpha1=alpha1, beta=beta, alpha2=alpha2, Pt=transmit_power)


@dataclass(frozen=True)
class ProblemSpec:  # pylint: disable=too-many-instance-attributes
    """Frame design problem: the single-SU variant p0 or the cooperative variant p1.

    Attributes:
        variant: "p0" (single SU with compressive sensing) or "p1" (cooperative network
            with matrix completion).
        wpt: Beacon field constants.
        kappa: Compression ratio.
        T: Frame length in s.
        Ps: Sensing power in W.
        Pt_min: Lower transmit power bound in W.
        Pt_max: Upper transmit power bound in W.
        N0: Data link noise power in W.
        sensing: Sensing budget and targets.
        I: Channel count of the monitored band.
        K: Occupied channel count.
        n: Nyquist samples of a sensing window at the reference operating point.
        snr: Per-sample signal-to-noise ratio of the primary signal.
        J: SUs in the network.
        J1: Active SUs reporting to the fusion center.
        alpha2_min: Lower bound of the second harvest slot.
        bound_mode: Which observation bound drives the p1 sensing constraint.
        observation_ratio: Observed share of the n×J matrix in practical mode.
        C_mc: Constant of the theoretical observation bound.
    """

    variant: Variant
    wpt: WptParams
    sensing: SensingParams
    Ps: float = Field(gt=0)
    Pt_min: float = Field(gt=0)
    Pt_max: float = Field(gt=0)
    N0: float = Field(gt=0)
    kappa: float = Field(default=1.0, gt=0, le=1)
    T: float = Field(default=1.0, gt=0)
    I: int = Field(default=32, ge=1)  # noqa: E741
    K: int = Field(default=4, ge=1)
    n: int = Field(default=1000, ge=2)
    snr: float = Field(default=0.1, ge=0)
    J: int = Field(default=1, ge=1)
    J1: int = Field(default=1, ge=1)
    alpha2_min: float = Field(default=0.0, ge=0, lt=1)
    bound_mode: BoundMode = "practical"
    observation_ratio: float = Field(default=0.3, gt=0, le=1)
    C_mc: float = Field(default=2.0, gt=0)

    @model_validator(mode="after")
    def check_consistency(self) -> "ProblemSpec":
        """Validate cross-field bounds.

        Returns:
            The validated problem.

        Raises:
            ValueError: if bounds are inverted or the network sizes disagree.
        """
        if self.Pt_min > self.Pt_max:
            raise ValueError("Pt_min must not exceed Pt_max")
        if self.K >= self.I:
            raise ValueError("K must be smaller than I")
        if self.J1 > self.J:
            raise ValueError("J1 must not exceed J")
        return self

    @property
    def K_eff(self) -> float:  # noqa: N802
        """Return the bin-level sparsity K·n/I."""
        return self.K * self.n / self.I

    @property
    def samples_per_beta(self) -> float:
        """Return the Nyquist samples funded by a unit sensing fraction, T·Ps/e_s."""
        return self.T * self.Ps / self.sensing.e_s

    def thresholds(self, transmit_power: float) -> PowerThresholds:
        """Build the power thresholds for a given transmit power.

        Args:
            transmit_power: Transmit power in W.

        Returns:
            PowerThresholds: the thresholds.
        """
        return PowerThresholds(
            Ps=self.Ps, Pt=transmit_power, Pt_min=self.Pt_min, Pt_max=self.Pt_max, N0=self.N0
        )

    def frame(self, design: DesignTuple) -> FrameSplit:
        """Build the frame split of a design tuple.

        Args:
            design: A design tuple satisfying C1 to C4.

        Returns:
            FrameSplit: the frame split.
        """
        return FrameSplit(
            alpha1=design.alpha1,
            beta=design.beta,
            alpha2=design.alpha2,
            kappa=self.kappa,
            T=self.T,
        )
