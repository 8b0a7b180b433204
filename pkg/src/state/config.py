# Copyright 2024 Canonical Ltd.
# See LICENSE file for licensing details.

"""Experiment configuration: YAML sections with units in the key names."""

import dataclasses
import hashlib
import logging
import math
import typing
from pathlib import Path

import yaml
from pydantic import ConfigDict, Field, TypeAdapter, ValidationError, model_validator
from pydantic.dataclasses import dataclass

import mathkit
from state.completion import CompletionConfig
from state.problem import BoundMode, ProblemSpec, Variant
from state.sensing import SensingParams
from state.wpt import FrameSplit, PowerThresholds, WptParams, path_loss_constant

from .exception import StateValidationBaseError

logger = logging.getLogger(__name__)

SCENARIOS = ("fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "benchmark")
SECTION = ConfigDict(extra="forbid")
# Experiment settings that change how a run executes but never its results.
RUNTIME_FIELDS = ("output_path", "n_jobs")

SweepValue = typing.Union[int, float, str]


class InvalidExperimentConfigError(StateValidationBaseError):
    """Exception raised when an experiment configuration is found to be invalid."""


class UnknownScenarioError(StateValidationBaseError):
    """Exception raised when a scenario id is not in the catalogue."""


class InvalidSweepError(StateValidationBaseError):
    """Exception raised when a sweep axis references no parameter or has no values."""


@dataclass(frozen=True, config=SECTION)
class ExperimentSection:
    """Run settings.

    Attributes:
        scenario: Scenario id.
        base_seed: Seed of every random stream of the run.
        trials: Monte Carlo trials per point; the scenario default when None.
        output_path: Result table path.
        n_jobs: Sweep points evaluated concurrently.
    """

    scenario: str = "fig2"
    base_seed: int = Field(default=0, ge=0, le=mathkit.UINT64_MAX)
    trials: typing.Optional[int] = Field(default=None, ge=1)
    output_path: str = "results.csv"
    n_jobs: int = 1


@dataclass(frozen=True, config=SECTION)
class WptSection:
    """Beacon field, in boundary units.

    Attributes:
        lambda_p_per_m2: Beacon density.
        antennas: Antennas per beacon.
        Pp_dbm: Beacon transmit power.
        eta: Conversion efficiency.
        carrier_hz: Carrier of the power transfer link.
        path_loss_exponent: ξ.
        d0_m: Protection-zone radius.
    """

    lambda_p_per_m2: float = Field(default=1e-3, ge=0)
    antennas: int = Field(default=32, ge=1)
    Pp_dbm: float = 43.0
    eta: float = Field(default=0.8, gt=0, le=1)
    carrier_hz: float = Field(default=900e6, gt=0)
    path_loss_exponent: float = Field(default=2.0, ge=2)
    d0_m: float = Field(default=1.0, ge=1)


@dataclass(frozen=True, config=SECTION)
class FrameSection:
    """Frame split used by the fixed-design scenarios.

    Attributes:
        alpha1: First harvest slot fraction.
        beta: Nyquist-equivalent sensing fraction.
        alpha2: Second harvest slot fraction.
        kappa: Compression ratio.
        T_s: Frame length.
    """

    alpha1: float = Field(default=0.25, ge=0, le=1)
    beta: float = Field(default=0.25, ge=0, le=1)
    alpha2: float = Field(default=0.2, ge=0, le=1)
    kappa: float = Field(default=1.0, gt=0, le=1)
    T_s: float = Field(default=1.0, gt=0)


@dataclass(frozen=True, config=SECTION)
class PowerSection:
    """Power thresholds and bounds.

    Attributes:
        Ps_dbm: Sensing power.
        Pt_dbm: Transmit power of the fixed-design scenarios.
        Pt_min_dbm: Lower transmit power bound.
        Pt_max_dbm: Upper transmit power bound.
        N0_dbm: Data link noise power.
    """

    Ps_dbm: float = 0.0
    Pt_dbm: float = 10.0
    Pt_min_dbm: float = 0.0
    Pt_max_dbm: float = 20.0
    N0_dbm: float = -90.0

    @model_validator(mode="after")
    def check_bounds(self) -> "PowerSection":
        """Validate the transmit power bounds.

        Returns:
            The validated section.

        Raises:
            ValueError: if Pt_min_dbm exceeds Pt_max_dbm.
        """
        if self.Pt_min_dbm > self.Pt_max_dbm:
            raise ValueError("Pt_min_dbm must not exceed Pt_max_dbm")
        return self


@dataclass(frozen=True, config=SECTION)
class SensingSection:  # pylint: disable=too-many-instance-attributes
    """Sensing scene and budget.

    Attributes:
        channels: Channel count I.
        occupied: Occupied channel count K.
        n_samples: Nyquist samples of the reference window in the throughput model.
        snr_db: Primary signal SNR.
        noise_w: Noise power of the simulated detection scenes.
        e_s_j: Energy per Nyquist sample.
        Pd_target: Target detection probability.
        C_cs: Constant of the compressive sample bound.
        detection_n_samples: Window length of the simulated detection scenes.
    """

    channels: int = Field(default=32, ge=1)
    occupied: int = Field(default=4, ge=1)
    n_samples: int = Field(default=1000, ge=2)
    snr_db: float = -10.0
    noise_w: float = Field(default=1.0, gt=0)
    e_s_j: float = Field(default=2.5e-7, gt=0)
    Pd_target: float = Field(default=0.9, gt=0.5, lt=1)
    C_cs: float = Field(default=2.0, gt=0)
    detection_n_samples: int = Field(default=256, ge=2)

    @model_validator(mode="after")
    def check_scene(self) -> "SensingSection":
        """Validate the channel partition.

        Returns:
            The validated section.

        Raises:
            ValueError: if occupied >= channels or the detection window does not split.
        """
        if self.occupied >= self.channels:
            raise ValueError("occupied must be smaller than channels")
        if self.detection_n_samples % self.channels:
            raise ValueError("detection_n_samples must be divisible by channels")
        return self


@dataclass(frozen=True, config=SECTION)
class CompletionSection:
    """Matrix completion solver and observation bound.

    Attributes:
        tau: Final singular-value threshold; zero for the noise-free schedule.
        step: Relative step size.
        max_iter: Iteration cap.
        tol: Relative-change tolerance.
        bound_mode: Observation bound driving the cooperative sensing constraint.
        observation_ratio: Observed share of the matrix in practical mode.
        C_mc: Constant of the theoretical observation bound.
    """

    tau: float = Field(default=0.0, ge=0)
    step: float = Field(default=1.2, gt=0, lt=2)
    max_iter: int = Field(default=500, ge=1)
    tol: float = Field(default=1e-5, gt=0, lt=1)
    bound_mode: BoundMode = "practical"
    observation_ratio: float = Field(default=0.3, gt=0, le=1)
    C_mc: float = Field(default=2.0, gt=0)


@dataclass(frozen=True, config=SECTION)
class NetworkSection:
    """Cooperative network size.

    Attributes:
        J: SUs in the network.
        J1: Active SUs.
    """

    J: int = Field(default=50, ge=1)
    J1: int = Field(default=30, ge=1)


@dataclass(frozen=True, config=SECTION)
class OptimizerSection:
    """Optimizer settings.

    Attributes:
        variant: Problem variant.
        method: Optimizer used by single-method scenarios.
        alpha2_min: Lower bound of the second harvest slot.
        steps: Grid spacing of alpha1, beta, alpha2 and Pt (dB).
        samples: Random sampling tuple count.
        starts: Local search start count.
        budget: Local search evaluations per start.
    """

    variant: Variant = "p0"
    method: typing.Literal["grid", "random", "local"] = "grid"
    alpha2_min: float = Field(default=0.05, ge=0, lt=1)
    steps: tuple[float, float, float, float] = (0.02, 0.02, 0.02, 1.0)
    samples: int = Field(default=10_000, ge=1)
    starts: int = Field(default=20, ge=1)
    budget: int = Field(default=400, ge=1)


@dataclass(frozen=True, config=SECTION)
class SweepAxis:
    """One sweep axis.

    Attributes:
        name: Dotted parameter path, e.g. "wpt.lambda_p_per_m2".
        values: Values taken by the parameter.
    """

    name: str
    values: tuple[SweepValue, ...] = Field(min_length=1)


@dataclass(frozen=True, config=SECTION)
class ExperimentConfig:  # pylint: disable=too-many-instance-attributes
    """Fully resolved experiment configuration.

    Attributes:
        experiment: Run settings.
        wpt: Beacon field.
        frame: Fixed frame split.
        power: Powers.
        sensing: Sensing scene and budget.
        completion: Completion settings.
        network: Network size.
        optimizer: Optimizer settings.
        sweep: Sweep axes; the scenario's own axes when empty.
    """

    experiment: ExperimentSection = Field(default_factory=ExperimentSection)
    wpt: WptSection = Field(default_factory=WptSection)
    frame: FrameSection = Field(default_factory=FrameSection)
    power: PowerSection = Field(default_factory=PowerSection)
    sensing: SensingSection = Field(default_factory=SensingSection)
    completion: CompletionSection = Field(default_factory=CompletionSection)
    network: NetworkSection = Field(default_factory=NetworkSection)
    optimizer: OptimizerSection = Field(default_factory=OptimizerSection)
    sweep: tuple[SweepAxis, ...] = ()

    def wpt_params(self) -> WptParams:
        """Build the beacon field component in SI units.

        Returns:
            WptParams: the component.
        """
        return WptParams(
            lambda_p=self.wpt.lambda_p_per_m2,
            M=self.wpt.antennas,
            Pp=float(mathkit.dbm_to_watt(self.wpt.Pp_dbm)),
            eta=self.wpt.eta,
            A=path_loss_constant(self.wpt.carrier_hz),
            xi=self.wpt.path_loss_exponent,
            d0=self.wpt.d0_m,
        )

    def frame_split(self) -> FrameSplit:
        """Build the fixed frame split.

        Returns:
            FrameSplit: the component.
        """
        return FrameSplit(
            alpha1=self.frame.alpha1,
            beta=self.frame.beta,
            alpha2=self.frame.alpha2,
            kappa=self.frame.kappa,
            T=self.frame.T_s,
        )

    def power_thresholds(self) -> PowerThresholds:
        """Build the power thresholds in W.

        Returns:
            PowerThresholds: the component.
        """
        return PowerThresholds(
            Ps=float(mathkit.dbm_to_watt(self.power.Ps_dbm)),
            Pt=float(mathkit.dbm_to_watt(self.power.Pt_dbm)),
            Pt_min=float(mathkit.dbm_to_watt(self.power.Pt_min_dbm)),
            Pt_max=float(mathkit.dbm_to_watt(self.power.Pt_max_dbm)),
            N0=float(mathkit.dbm_to_watt(self.power.N0_dbm)),
        )

    def sensing_params(self) -> SensingParams:
        """Build the sensing budget component.

        Returns:
            SensingParams: the component.
        """
        return SensingParams(
            e_s=self.sensing.e_s_j, Pd_target=self.sensing.Pd_target, C_cs=self.sensing.C_cs
        )

    @property
    def snr(self) -> float:
        """Return the linear primary signal SNR."""
        return 10.0 ** (self.sensing.snr_db / 10.0)

    def problem_spec(self, variant: typing.Optional[Variant] = None) -> ProblemSpec:
        """Build the frame design problem.

        Args:
            variant: Problem variant; the optimizer section's by default.

        Returns:
            ProblemSpec: the problem.
        """
        thresholds = self.power_thresholds()
        return ProblemSpec(
            variant=variant or self.optimizer.variant,
            wpt=self.wpt_params(),
            sensing=self.sensing_params(),
            Ps=thresholds.Ps,
            Pt_min=thresholds.Pt_min,
            Pt_max=thresholds.Pt_max,
            N0=thresholds.N0,
            kappa=self.frame.kappa,
            T=self.frame.T_s,
            I=self.sensing.channels,
            K=self.sensing.occupied,
            n=self.sensing.n_samples,
            snr=self.snr,
            J=self.network.J,
            J1=self.network.J1,
            alpha2_min=self.optimizer.alpha2_min,
            bound_mode=self.completion.bound_mode,
            observation_ratio=self.completion.observation_ratio,
            C_mc=self.completion.C_mc,
        )

    def completion_config(self) -> CompletionConfig:
        """Build the completion solver settings.

        Returns:
            CompletionConfig: the component.
        """
        return CompletionConfig(
            threshold_tau=self.completion.tau,
            step=self.completion.step,
            max_iter=self.completion.max_iter,
            tol=self.completion.tol,
        )

    def override(self, name: str, value: typing.Any) -> "ExperimentConfig":
        """Return a copy with one dotted parameter replaced and revalidated.

        Args:
            name: Dotted parameter path, "section.key".
            value: New value.

        Returns:
            ExperimentConfig: the updated configuration.

        Raises:
            InvalidSweepError: if the path names no parameter.
            InvalidExperimentConfigError: if the value is invalid.
        """
        section_name, _, key = name.partition(".")
        section = getattr(self, section_name, None)
        if (
            section_name == "sweep"
            or not dataclasses.is_dataclass(section)
            or key not in {field.name for field in dataclasses.fields(section)}
        ):
            raise InvalidSweepError(f"sweep axis {name!r} references no parameter")
        mapping = config_to_mapping(self)
        mapping[section_name][key] = value
        return resolve_config(mapping)

    def sha256(self) -> str:
        """Return the SHA-256 of the dumped configuration without its runtime fields."""
        mapping = config_to_mapping(self)
        for key in RUNTIME_FIELDS:
            del mapping["experiment"][key]
        return hashlib.sha256(yaml.safe_dump(mapping, sort_keys=False).encode()).hexdigest()


CONFIG_ADAPTER = TypeAdapter(ExperimentConfig)


def get_invalid_config_fields(exc: ValidationError) -> typing.List[str]:
    """Return the dotted key paths of the fields that failed validation.

    Args:
        exc: The validation error exception.

    Returns:
        Dotted paths such as "power.Ps_dbm", in error order.
    """
    paths: list[str] = []
    for error in exc.errors():
        path = ".".join(str(part) for part in error["loc"]) or "<root>"
        if path not in paths:
            paths.append(path)
    return paths


def resolve_config(mapping: typing.Mapping[str, typing.Any]) -> ExperimentConfig:
    """Validate a configuration mapping and apply defaults.

    Args:
        mapping: Parsed configuration document.

    Returns:
        ExperimentConfig: the resolved configuration.

    Raises:
        InvalidExperimentConfigError: on schema violations, naming each key path.
        UnknownScenarioError: if the scenario id is not in the catalogue.
        InvalidSweepError: if a sweep axis references no parameter.
    """
    try:
        config = CONFIG_ADAPTER.validate_python(dict(mapping))
    except ValidationError as exc:
        error_field_str = ",".join(get_invalid_config_fields(exc))
        logger.error("Invalid configuration keys: %s", error_field_str)
        raise InvalidExperimentConfigError(f"invalid configuration: {error_field_str}") from exc
    if config.experiment.scenario not in SCENARIOS:
        raise UnknownScenarioError(
            f"unknown scenario {config.experiment.scenario!r}, expected one of {SCENARIOS}"
        )
    for axis in config.sweep:
        section, _, key = axis.name.partition(".")
        section_value = getattr(config, section, None)
        if (
            section == "sweep"
            or not dataclasses.is_dataclass(section_value)
            or key not in {field.name for field in dataclasses.fields(section_value)}
        ):
            raise InvalidSweepError(f"sweep axis {axis.name!r} references no parameter")
        if any(isinstance(value, float) and not math.isfinite(value) for value in axis.values):
            raise InvalidSweepError(f"sweep axis {axis.name!r} has a non-finite value")
    return config


def load_config(path: typing.Union[str, Path]) -> ExperimentConfig:
    """Read and resolve a YAML configuration file.

    Args:
        path: Configuration path.

    Returns:
        ExperimentConfig: the resolved configuration.

    Raises:
        InvalidExperimentConfigError: if the file is not a YAML mapping or is invalid.
    """
    try:
        document = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except (OSError, yaml.YAMLError) as exc:
        raise InvalidExperimentConfigError(f"cannot read configuration {path}: {exc}") from exc
    if document is None:
        document = {}
    if not isinstance(document, dict):
        raise InvalidExperimentConfigError(f"configuration {path} is not a mapping")
    return resolve_config(document)


def config_to_mapping(config: ExperimentConfig) -> dict[str, typing.Any]:
    """Return the configuration as plain YAML-safe data.

    Args:
        config: Resolved configuration.

    Returns:
        Nested dictionaries and lists.
    """
    return CONFIG_ADAPTER.dump_python(config, mode="json")


def dump_config(config: ExperimentConfig) -> str:
    """Render the configuration as YAML; load_config of the text gives it back.

    Args:
        config: Resolved configuration.

    Returns:
        The YAML text.
    """
    return yaml.safe_dump(config_to_mapping(config), sort_keys=False)
