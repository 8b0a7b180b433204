# Copyright 2024 Canonical Ltd.
# See LICENSE file for licensing details.

"""Wireless power transfer from a Poisson field of power beacons.

An SU harvests from the beacon with the strongest effective channel ‖h_p‖²·A·d_p^(-ξ).
The harvested power of each slot is compared with the power the slot has to fund; the
probability that it falls short is the power outage probability, available both in
closed form and as a Monte Carlo estimate.
"""

import logging
import math
import typing

import numpy as np
from scipy import special

import mathkit
from exception import DegenerateFrameError, DomainError
from state.wpt import FrameSplit, PbDraw, PowerThresholds, WptParams

logger = logging.getLogger(__name__)

Kind = typing.Literal["s", "t", "a", "i"]
KINDS: tuple[Kind, ...] = ("s", "t", "a", "i")
R_MAX_CAP = 1e4
# Expected beacon count materialized per Monte Carlo chunk.
CHUNK_BEACONS = 2_000_000


class SlotPowers(typing.NamedTuple):
    """Powers available in each slot for a given effective gain.

    Attributes:
        P_H1: Sensing power funded by the first harvest slot.
        P_T2: Transmit power of an active SU.
        P_H3: Transmit power of an inactive SU.
    """

    P_H1: mathkit.ArrayOrFloat
    P_T2: mathkit.ArrayOrFloat
    P_H3: mathkit.ArrayOrFloat


class McEstimate(typing.NamedTuple):
    """Monte Carlo outage estimate.

    Attributes:
        estimate: Fraction of trials in outage.
        stderr: Binomial standard error of the estimate.
        trials: Number of trials.
    """

    estimate: float
    stderr: float
    trials: int


class CssOutage(typing.NamedTuple):
    """Outage profile of a cooperative network.

    Attributes:
        p_active: Transmission outage of an active SU.
        p_inactive: Transmission outage of an inactive SU.
        p_average: Network average weighted by the active share J1/J.
    """

    p_active: float
    p_inactive: float
    p_average: float


class CssMcEstimate(typing.NamedTuple):
    """Monte Carlo estimate of a network with per-SU activity draws.

    Attributes:
        active_fraction: Share of SU-frames whose first slot funded sensing.
        p_average: Share of SU-frames in transmission outage.
        samples: SU-frames simulated.
    """

    active_fraction: float
    p_average: float
    samples: int


def sample_pb_field(params: WptParams, r_max: float, rng: np.random.Generator) -> PbDraw:
    """Draw the beacons of an annulus [d0, r_max] around the SU.

    Args:
        params: Beacon field constants.
        r_max: Outer radius of the simulation window in m.
        rng: Random stream.

    Returns:
        PbDraw: distances (density ∝ r) and MRT channel gains.

    Raises:
        DomainError: if r_max does not exceed d0.
    """
    if r_max <= params.d0:
        raise DomainError(f"r_max={r_max} must exceed d0={params.d0}")
    mean = params.lambda_p * math.pi * (r_max**2 - params.d0**2)
    count = mathkit.sample_poisson(mean, rng)
    distances = _annulus_radii(params.d0, r_max, count, rng)
    gains = mathkit.sample_channel_gain(params.M, rng, size=count)
    return PbDraw(distances=distances, gains=gains)


def _annulus_radii(
    d0: float, r_max: float, count: int, rng: np.random.Generator
) -> np.ndarray:
    """Draw radii uniformly over the area of an annulus."""
    return np.sqrt(d0**2 + rng.uniform(size=count) * (r_max**2 - d0**2))


def best_effective_gain(draw: PbDraw, params: WptParams) -> float:
    """Return max_p ‖h_p‖²·A·d_p^(-ξ), or 0 for an empty field.

    Args:
        draw: Beacon field realization.
        params: Beacon field constants.

    Returns:
        The effective gain of the strongest beacon.
    """
    if draw.count == 0:
        return 0.0
    return float(np.max(draw.gains * params.A * draw.distances ** (-params.xi)))


def _harvest_share(
    kind: Kind, alpha1: typing.Any, sensing: typing.Any, alpha2: typing.Any
) -> typing.Any:
    """Return the harvest fraction funding the slot of the given kind."""
    if kind == "s":
        return alpha1
    if kind in ("t", "a"):
        return alpha1 + alpha2
    return alpha1 + sensing + alpha2


def slot_powers(
    G: mathkit.ArrayOrFloat, params: WptParams, frame: FrameSplit, thr: PowerThresholds
) -> SlotPowers:
    """Convert an effective gain into the power available in each slot.

    Args:
        G: Effective gain of the selected beacon (scalar or array).
        params: Beacon field constants.
        frame: Frame split.
        thr: Power thresholds.

    Returns:
        SlotPowers: (P_H1, P_T2, P_H3) in W.

    Raises:
        DegenerateFrameError: if the sensing or the transmission slot has zero length.
    """
    if frame.sensing <= 0.0:
        raise DegenerateFrameError("sensing slot kappa*beta has zero length")
    transmission = 1.0 - frame.alpha1 - frame.sensing - frame.alpha2
    if transmission <= 0.0:
        raise DegenerateFrameError("transmission slot has zero length")
    harvested = np.asarray(G, dtype=float) * params.eta * params.Pp
    p_h1 = harvested * frame.alpha1 / frame.sensing
    # A negative remainder means the first slot could not fund sensing: outage, not debt.
    p_t2 = np.maximum(
        (harvested * (frame.alpha1 + frame.alpha2) - thr.Ps * frame.sensing) / transmission, 0.0
    )
    p_h3 = harvested * (frame.alpha1 + frame.sensing + frame.alpha2) / transmission
    return SlotPowers(
        P_H1=mathkit.as_output(p_h1),
        P_T2=mathkit.as_output(p_t2),
        P_H3=mathkit.as_output(p_h3),
    )


def mu_values(  # pylint: disable=too-many-arguments,too-many-positional-arguments
    kind: Kind,
    params: WptParams,
    alpha1: mathkit.ArrayOrFloat,
    sensing: mathkit.ArrayOrFloat,
    alpha2: mathkit.ArrayOrFloat,
    Ps: mathkit.ArrayOrFloat,
    Pt: mathkit.ArrayOrFloat,
) -> np.ndarray:
    """Evaluate μ for arrays of time splits; zero harvest shares map to +inf.

    Args:
        kind: "s" sensing, "t"/"a" transmission of an active SU, "i" inactive SU.
        params: Beacon field constants.
        alpha1: First harvest fractions.
        sensing: Sensing fractions κβ.
        alpha2: Second harvest fractions.
        Ps: Sensing power in W.
        Pt: Transmit power in W.

    Returns:
        μ, broadcast over the inputs.
    """
    alpha1, sensing, alpha2, Ps, Pt = np.broadcast_arrays(
        *(np.asarray(value, dtype=float) for value in (alpha1, sensing, alpha2, Ps, Pt))
    )
    transmission = np.clip(1.0 - alpha1 - sensing - alpha2, 0.0, None)
    if kind == "s":
        required = sensing * Ps
    elif kind in ("t", "a"):
        required = Pt * transmission + Ps * sensing
    else:
        required = Pt * transmission
    share = _harvest_share(kind, alpha1, sensing, alpha2)
    scale = params.eta * params.Pp * params.A
    with np.errstate(divide="ignore", invalid="ignore"):
        mu = np.where(share > 0.0, required / (scale * np.where(share > 0.0, share, 1.0)), np.inf)
    return mu


def mu_coefficient(
    kind: Kind, params: WptParams, frame: FrameSplit, thr: PowerThresholds
) -> float:
    """Return the outage threshold μ of a slot kind.

    μ_s = κβ·Ps/(ηPpA·α1); μ_t = μ_a = (Pt·(1-α1-κβ-α2) + Ps·κβ)/(ηPpA·(α1+α2));
    μ_i = Pt·(1-α1-κβ-α2)/(ηPpA·(α1+κβ+α2)).

    Args:
        kind: One of "s", "t", "a", "i".
        params: Beacon field constants.
        frame: Frame split.
        thr: Power thresholds.

    Returns:
        μ for the kind.

    Raises:
        DomainError: for an unknown kind.
        DegenerateFrameError: if the funding harvest share is zero.
    """
    if kind not in KINDS:
        raise DomainError(f"unknown outage kind {kind!r}")
    if _harvest_share(kind, frame.alpha1, frame.sensing, frame.alpha2) <= 0.0:
        raise DegenerateFrameError(f"harvest share funding kind {kind!r} is zero")
    return float(
        mu_values(kind, params, frame.alpha1, frame.sensing, frame.alpha2, thr.Ps, thr.Pt)
    )


def outage_closed_form(mu: mathkit.ArrayOrFloat, params: WptParams) -> mathkit.ArrayOrFloat:
    """Closed-form power outage probability.

    exp(-(πλδ/μ^δ)·Σ_{m=0}^{M-1} Γ(m+δ, μ·d0^ξ)/m!), with μ = 0 taken as the limit 0 and
    μ = +inf as certain outage.

    Args:
        mu: Threshold coefficient(s), nonnegative.
        params: Beacon field constants.

    Returns:
        The outage probability, broadcast over mu.

    Raises:
        DomainError: if mu is negative or NaN.
    """
    values = np.asarray(mu, dtype=float)
    if np.any(np.isnan(values)) or np.any(values < 0.0):
        raise DomainError(f"outage_closed_form needs mu >= 0, got {mu!r}")
    if params.lambda_p == 0.0:
        return mathkit.as_output(np.ones_like(values))
    delta = params.delta
    orders = np.arange(params.M, dtype=float) + delta
    finite = np.isfinite(values) & (values > 0.0)
    safe_mu = np.where(finite, values, 1.0)
    limits = safe_mu[..., np.newaxis] * params.d0**params.xi
    # Γ(m+δ, z)/m! with the factorial folded into the log-gamma normalization.
    terms = special.gammaincc(orders, limits) * np.exp(
        special.gammaln(orders) - special.gammaln(np.arange(params.M) + 1.0)
    )
    exponent = math.pi * params.lambda_p * delta * safe_mu ** (-delta) * terms.sum(axis=-1)
    result = np.where(finite, np.exp(-exponent), np.where(values > 0.0, 1.0, 0.0))
    return mathkit.as_output(result)


def default_r_max(mu: float, params: WptParams) -> float:
    """Simulation window radius 10·(M/μ)^(1/ξ), kept above 2·d0 and capped at 10⁴ m.

    Args:
        mu: Threshold coefficient of the simulated slot.
        params: Beacon field constants.

    Returns:
        The window radius in m.
    """
    if mu <= 0.0:
        return R_MAX_CAP
    radius = 10.0 * (params.M / mu) ** (1.0 / params.xi)
    return float(min(max(radius, 2.0 * params.d0), R_MAX_CAP))


def max_effective_gains(
    params: WptParams, r_max: float, trials: int, rng: np.random.Generator
) -> np.ndarray:
    """Draw one beacon field per trial and return max_p ‖h_p‖²·d_p^(-ξ) of each.

    The constant A is not applied. Trials are processed in chunks sized to keep about
    CHUNK_BEACONS beacons in memory; empty fields yield 0.

    Args:
        params: Beacon field constants.
        r_max: Window radius in m.
        trials: Number of independent fields.
        rng: Random stream.

    Returns:
        Array of length trials.

    Raises:
        DomainError: if r_max does not exceed d0.
    """
    if r_max <= params.d0:
        raise DomainError(f"r_max={r_max} must exceed d0={params.d0}")
    mean = params.lambda_p * math.pi * (r_max**2 - params.d0**2)
    chunk = max(1, min(trials, int(CHUNK_BEACONS / max(mean, 1.0))))
    maxima = np.zeros(trials)
    for start in range(0, trials, chunk):
        size = min(chunk, trials - start)
        counts = rng.poisson(mean, size=size)
        total = int(counts.sum())
        if total == 0:
            continue
        radii = _annulus_radii(params.d0, r_max, total, rng)
        effective = rng.gamma(shape=float(params.M), scale=1.0, size=total) * radii ** (
            -params.xi
        )
        nonempty = counts > 0
        offsets = np.concatenate(([0], np.cumsum(counts)[:-1]))[nonempty]
        block = maxima[start : start + size]
        block[nonempty] = np.maximum.reduceat(effective, offsets)
    return maxima


def _slot_power(
    kind: Kind,
    G: np.ndarray,
    params: WptParams,
    frame: FrameSplit,
    thr: PowerThresholds,
) -> tuple[np.ndarray, float]:
    """Return the slot power of a kind and the threshold it is compared with."""
    if kind == "s":
        if frame.sensing <= 0.0:
            raise DegenerateFrameError("sensing slot kappa*beta has zero length")
        return G * params.eta * params.Pp * frame.alpha1 / frame.sensing, thr.Ps
    powers = slot_powers(G, params, frame, thr)
    if kind in ("t", "a"):
        return np.asarray(powers.P_T2), thr.Pt
    return np.asarray(powers.P_H3), thr.Pt


def outage_monte_carlo(  # pylint: disable=too-many-arguments,too-many-positional-arguments
    kind: Kind,
    params: WptParams,
    frame: FrameSplit,
    thr: PowerThresholds,
    trials: int,
    rng: np.random.Generator,
    r_max: typing.Optional[float] = None,
) -> McEstimate:
    """Estimate a power outage probability by direct simulation of the beacon field.

    Args:
        kind: One of "s", "t", "a", "i".
        params: Beacon field constants.
        frame: Frame split.
        thr: Power thresholds.
        trials: Number of independent frames.
        rng: Random stream.
        r_max: Window radius; default_r_max(μ) when omitted.

    Returns:
        McEstimate: outage fraction and its standard error.

    Raises:
        DomainError: if trials < 1.
    """
    if trials < 1:
        raise DomainError(f"outage_monte_carlo needs trials >= 1, got {trials}")
    mu = mu_coefficient(kind, params, frame, thr)
    radius = r_max if r_max is not None else default_r_max(mu, params)
    if mu == 0.0:
        # Any beacon clears a zero threshold, so only empty fields are outages.
        mean = params.lambda_p * math.pi * (radius**2 - params.d0**2)
        outages = int(np.count_nonzero(rng.poisson(mean, size=trials) == 0))
    else:
        gains = max_effective_gains(params, radius, trials, rng) * params.A
        powers, threshold = _slot_power(kind, gains, params, frame, thr)
        outages = int(np.count_nonzero(powers <= threshold))
    estimate = outages / trials
    stderr = math.sqrt(estimate * (1.0 - estimate) / trials)
    logger.debug("outage_monte_carlo kind=%s mu=%g r_max=%g -> %g", kind, mu, radius, estimate)
    return McEstimate(estimate=estimate, stderr=stderr, trials=trials)


def system_outage(p_s_out: float, p_t_out: float) -> float:
    """Return 1 - (1 - P_s^out)(1 - P_t^out).

    Args:
        p_s_out: Sensing outage probability.
        p_t_out: Transmission outage probability.

    Returns:
        The outage of the whole frame.

    Raises:
        DomainError: if an input lies outside [0, 1].
    """
    for probability in (p_s_out, p_t_out):
        if not 0.0 <= probability <= 1.0:
            raise DomainError(f"outage probabilities must lie in [0, 1], got {probability}")
    return 1.0 - (1.0 - p_s_out) * (1.0 - p_t_out)


def css_outage_profile(
    params: WptParams, frame: FrameSplit, thr: PowerThresholds, J: int, J1: int
) -> CssOutage:
    """Outage of active, inactive and average SUs of a cooperative network.

    Active SUs hold the sensing energy by definition, so their sensing outage is zero.

    Args:
        params: Beacon field constants.
        frame: Frame split.
        thr: Power thresholds.
        J: Number of SUs.
        J1: Number of active SUs.

    Returns:
        CssOutage: the outage profile.

    Raises:
        DomainError: unless 1 <= J1 <= J.
    """
    if not 1 <= J1 <= J:
        raise DomainError(f"need 1 <= J1 <= J, got J1={J1}, J={J}")
    p_transmit = float(outage_closed_form(mu_coefficient("a", params, frame, thr), params))
    p_active = system_outage(0.0, p_transmit)
    p_inactive = float(outage_closed_form(mu_coefficient("i", params, frame, thr), params))
    p_average = (J1 * p_active + (J - J1) * p_inactive) / J
    return CssOutage(p_active=p_active, p_inactive=p_inactive, p_average=p_average)


def css_outage_monte_carlo(  # pylint: disable=too-many-arguments,too-many-positional-arguments
    params: WptParams,
    frame: FrameSplit,
    thr: PowerThresholds,
    J: int,
    trials: int,
    rng: np.random.Generator,
) -> CssMcEstimate:
    """Simulate a network whose SUs decide activity from their own first-slot harvest.

    Every SU of every frame sees an independent beacon field. An SU is active when its
    sensing power P_H1 reaches Ps; active SUs then transmit from the remaining energy,
    inactive ones from the energy of all three harvest slots.

    Args:
        params: Beacon field constants.
        frame: Frame split.
        thr: Power thresholds.
        J: Number of SUs per frame.
        trials: Number of frames.
        rng: Random stream.

    Returns:
        CssMcEstimate: the active share and the average transmission outage.

    Raises:
        DomainError: if J or trials is below 1.
    """
    if J < 1 or trials < 1:
        raise DomainError(f"need J >= 1 and trials >= 1, got J={J}, trials={trials}")
    thresholds = [
        mu for mu in (mu_coefficient(kind, params, frame, thr) for kind in ("s", "i")) if mu > 0.0
    ]
    radius = default_r_max(min(thresholds), params) if thresholds else 2.0 * params.d0
    samples = J * trials
    gains = max_effective_gains(params, radius, samples, rng) * params.A
    powers = slot_powers(gains, params, frame, thr)
    active = np.asarray(powers.P_H1) >= thr.Ps
    transmit = np.where(active, powers.P_T2, powers.P_H3)
    outages = int(np.count_nonzero(transmit <= thr.Pt))
    return CssMcEstimate(
        active_fraction=float(np.count_nonzero(active)) / samples,
        p_average=outages / samples,
        samples=samples,
    )
