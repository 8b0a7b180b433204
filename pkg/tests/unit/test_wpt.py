# Copyright 2024 Canonical Ltd.
# See LICENSE file for licensing details.

"""Unit tests for the power transfer model."""

import math

import numpy as np
import pytest

import wpt
from exception import DegenerateFrameError, DomainError
from state.wpt import FrameSplit, PbDraw, PowerThresholds, WptParams

SPOT_PARAMS = WptParams(lambda_p=1e-3, M=1, Pp=1.0, eta=1.0, xi=2.0, d0=1.0)


def test_outage_closed_form_spot_check():
    """
    arrange: Given M = 1, ξ = 2, d0 = 1, λ_p = 1e-3.
    act: Evaluate the closed-form outage at μ = 0.01.
    assert: The outage is 0.7327 within 5e-4.
    """
    assert wpt.outage_closed_form(0.01, SPOT_PARAMS) == pytest.approx(0.7327, abs=5e-4)


def test_outage_closed_form_limits(wpt_params: WptParams):
    """
    arrange: Given thresholds 0 and +inf, and an empty beacon field.
    act: Evaluate the closed-form outage.
    assert: Zero threshold never fails, an infinite one always does, no beacons always fail.
    """
    empty = WptParams(lambda_p=0.0, M=32, Pp=20.0, eta=0.8)

    assert wpt.outage_closed_form(0.0, wpt_params) == 0.0
    assert wpt.outage_closed_form(math.inf, wpt_params) == 1.0
    assert wpt.outage_closed_form(0.05, empty) == 1.0


def test_outage_closed_form_monotone(wpt_params: WptParams):
    """
    arrange: Given an increasing grid of thresholds.
    act: Evaluate the closed-form outage on the array.
    assert: The outage increases and stays in [0, 1].
    """
    outage = wpt.outage_closed_form(np.logspace(-3.0, 1.0, 40), wpt_params)

    assert np.all(np.diff(outage) > 0.0)
    assert np.all((outage >= 0.0) & (outage <= 1.0))


def test_outage_closed_form_decreases_with_density():
    """
    arrange: Given beacon densities 1e-4 and 1e-2.
    act: Evaluate the closed-form outage at the same threshold.
    assert: The denser field has the lower outage.
    """
    sparse = WptParams(lambda_p=1e-4, M=32, Pp=20.0, eta=0.8)
    dense = WptParams(lambda_p=1e-2, M=32, Pp=20.0, eta=0.8)

    assert wpt.outage_closed_form(0.1, dense) < wpt.outage_closed_form(0.1, sparse)


@pytest.mark.parametrize(
    "mu",
    [pytest.param(-0.1, id="negative"), pytest.param(math.nan, id="nan")],
)
def test_outage_closed_form_domain(mu: float, wpt_params: WptParams):
    """
    arrange: Given an invalid threshold.
    act: Evaluate the closed-form outage.
    assert: DomainError is raised.
    """
    with pytest.raises(DomainError):
        wpt.outage_closed_form(mu, wpt_params)


def test_mu_coefficient(wpt_params: WptParams, frame: FrameSplit, thresholds: PowerThresholds):
    """
    arrange: Given the default frame and thresholds.
    act: Compute μ for every kind.
    assert: Each matches its definition.
    """
    scale = wpt_params.eta * wpt_params.Pp * wpt_params.A
    transmission = 1.0 - frame.alpha1 - frame.sensing - frame.alpha2

    assert wpt.mu_coefficient("s", wpt_params, frame, thresholds) == pytest.approx(
        frame.sensing * thresholds.Ps / (scale * frame.alpha1)
    )
    assert wpt.mu_coefficient("t", wpt_params, frame, thresholds) == pytest.approx(
        (thresholds.Pt * transmission + thresholds.Ps * frame.sensing)
        / (scale * (frame.alpha1 + frame.alpha2))
    )
    assert wpt.mu_coefficient("a", wpt_params, frame, thresholds) == pytest.approx(
        wpt.mu_coefficient("t", wpt_params, frame, thresholds)
    )
    assert wpt.mu_coefficient("i", wpt_params, frame, thresholds) == pytest.approx(
        thresholds.Pt * transmission / (scale * (frame.alpha1 + frame.sensing + frame.alpha2))
    )


def test_mu_coefficient_errors(wpt_params: WptParams, thresholds: PowerThresholds):
    """
    arrange: Given an unknown kind and a frame without a first harvest slot.
    act: Compute μ.
    assert: DomainError and DegenerateFrameError are raised.
    """
    no_harvest = FrameSplit(alpha1=0.0, beta=0.25, alpha2=0.2)

    with pytest.raises(DomainError):
        wpt.mu_coefficient("x", wpt_params, no_harvest, thresholds)  # type: ignore[arg-type]
    with pytest.raises(DegenerateFrameError):
        wpt.mu_coefficient("s", wpt_params, no_harvest, thresholds)


def test_mu_values_zero_share_is_infinite(wpt_params: WptParams):
    """
    arrange: Given a split with no harvest before sensing.
    act: Evaluate μ_s on arrays.
    assert: The zero-share entry maps to +inf.
    """
    mu = wpt.mu_values("s", wpt_params, np.array([0.0, 0.2]), 0.25, 0.1, 1e-3, 1e-2)

    assert math.isinf(mu[0]) and math.isfinite(mu[1])


def test_slot_powers(wpt_params: WptParams, frame: FrameSplit, thresholds: PowerThresholds):
    """
    arrange: Given an effective gain.
    act: Convert it into slot powers.
    assert: Each slot power matches its energy balance.
    """
    gain = 1e-3
    harvested = gain * wpt_params.eta * wpt_params.Pp
    transmission = 1.0 - frame.alpha1 - frame.sensing - frame.alpha2

    powers = wpt.slot_powers(gain, wpt_params, frame, thresholds)

    assert powers.P_H1 == pytest.approx(harvested * frame.alpha1 / frame.sensing)
    assert powers.P_H3 == pytest.approx(
        harvested * (frame.alpha1 + frame.sensing + frame.alpha2) / transmission
    )
    assert powers.P_T2 >= 0.0


@pytest.mark.parametrize(
    "split",
    [
        pytest.param(FrameSplit(alpha1=0.3, beta=0.0, alpha2=0.2), id="no sensing"),
        pytest.param(FrameSplit(alpha1=0.5, beta=0.3, alpha2=0.2), id="no transmission"),
    ],
)
def test_slot_powers_degenerate(
    split: FrameSplit, wpt_params: WptParams, thresholds: PowerThresholds
):
    """
    arrange: Given a frame with a zero-length sensing or transmission slot.
    act: Convert a gain into slot powers.
    assert: DegenerateFrameError is raised.
    """
    with pytest.raises(DegenerateFrameError):
        wpt.slot_powers(1e-3, wpt_params, split, thresholds)


def test_sample_pb_field(wpt_params: WptParams, rng: np.random.Generator):
    """
    arrange: Given a 100 m window.
    act: Draw a beacon field.
    assert: Every beacon lies within [d0, r_max] and gains are aligned with distances.
    """
    draw = wpt.sample_pb_field(wpt_params, 100.0, rng)

    assert np.all((draw.distances >= wpt_params.d0) & (draw.distances <= 100.0))
    assert draw.gains.shape == draw.distances.shape
    with pytest.raises(DomainError):
        wpt.sample_pb_field(wpt_params, wpt_params.d0, rng)


def test_best_effective_gain(wpt_params: WptParams):
    """
    arrange: Given an empty field and a two-beacon field.
    act: Take the best effective gain.
    assert: The empty field gives 0; otherwise the strongest beacon wins.
    """
    empty = PbDraw(distances=np.empty(0), gains=np.empty(0))
    pair = PbDraw(distances=np.array([1.0, 2.0]), gains=np.array([1.0, 8.0]))

    assert wpt.best_effective_gain(empty, wpt_params) == 0.0
    assert wpt.best_effective_gain(pair, wpt_params) == pytest.approx(2.0 * wpt_params.A)


def test_default_r_max(wpt_params: WptParams):
    """
    arrange: Given zero, tiny and huge thresholds.
    act: Compute the window radius.
    assert: The radius is capped above and floored at 2·d0.
    """
    assert wpt.default_r_max(0.0, wpt_params) == wpt.R_MAX_CAP
    assert wpt.default_r_max(1e-12, wpt_params) == wpt.R_MAX_CAP
    assert wpt.default_r_max(1e12, wpt_params) == 2.0 * wpt_params.d0
    assert wpt.default_r_max(1.0, wpt_params) == pytest.approx(10.0 * math.sqrt(32.0))


def test_outage_monte_carlo_agrees(
    wpt_params: WptParams, frame: FrameSplit, thresholds: PowerThresholds, rng: np.random.Generator
):
    """
    arrange: Given the default operating point.
    act: Simulate the sensing outage over 2·10⁴ fields.
    assert: The estimate is within max(3·SE, 0.01) of the closed form.
    """
    analytic = wpt.outage_closed_form(
        wpt.mu_coefficient("s", wpt_params, frame, thresholds), wpt_params
    )

    estimate = wpt.outage_monte_carlo("s", wpt_params, frame, thresholds, 20_000, rng)

    assert abs(estimate.estimate - analytic) <= max(3.0 * estimate.stderr, 0.01)
    assert estimate.trials == 20_000


def test_outage_monte_carlo_spot_check(rng: np.random.Generator):
    """
    arrange: Given the single-antenna spot-check field.
    act: Simulate max_p ‖h_p‖²·d_p^(-ξ) over 10⁵ fields.
    assert: The share below μ = 0.01 matches the closed form within 3·SE.
    """
    trials = 100_000
    analytic = wpt.outage_closed_form(0.01, SPOT_PARAMS)

    gains = wpt.max_effective_gains(SPOT_PARAMS, wpt.default_r_max(0.01, SPOT_PARAMS), trials, rng)

    estimate = np.mean(gains <= 0.01)
    assert abs(estimate - analytic) <= 3.0 * math.sqrt(analytic * (1.0 - analytic) / trials)


def test_outage_monte_carlo_empty_field(
    frame: FrameSplit, thresholds: PowerThresholds, rng: np.random.Generator
):
    """
    arrange: Given a field without beacons.
    act: Simulate one trial.
    assert: The outage estimate is exactly one.
    """
    empty = WptParams(lambda_p=0.0, M=32, Pp=20.0, eta=0.8)

    estimate = wpt.outage_monte_carlo("s", empty, frame, thresholds, 1, rng)

    assert estimate.estimate == 1.0


def test_outage_monte_carlo_zero_sensing_power(frame: FrameSplit, rng: np.random.Generator):
    """
    arrange: Given Ps = 0, so the sensing threshold μ_s vanishes, with λ_p = 1e-3 and M = 32.
    act: Simulate the sensing outage over 10⁴ fields with the default window.
    assert: The estimate matches the closed-form zero within max(3·SE, 0.01).
    """
    params = WptParams(lambda_p=1e-3, M=32, Pp=20.0, eta=0.8)
    zero_ps = PowerThresholds(Ps=0.0, Pt=1e-2, Pt_min=1e-3, Pt_max=0.1, N0=1e-12)
    mu = wpt.mu_coefficient("s", params, frame, zero_ps)

    estimate = wpt.outage_monte_carlo("s", params, frame, zero_ps, 10_000, rng)

    assert mu == 0.0
    assert wpt.outage_closed_form(mu, params) == 0.0
    assert abs(estimate.estimate - 0.0) <= max(3.0 * estimate.stderr, 0.01)


def test_outage_monte_carlo_rejects_zero_trials(
    wpt_params: WptParams, frame: FrameSplit, thresholds: PowerThresholds, rng: np.random.Generator
):
    """
    arrange: Given zero trials.
    act: Simulate the outage.
    assert: DomainError is raised.
    """
    with pytest.raises(DomainError):
        wpt.outage_monte_carlo("s", wpt_params, frame, thresholds, 0, rng)


@pytest.mark.parametrize(
    "p_s, p_t, expected",
    [
        pytest.param(0.0, 0.0, 0.0, id="never"),
        pytest.param(0.2, 0.5, 0.6, id="independent"),
        pytest.param(1.0, 0.0, 1.0, id="always"),
    ],
)
def test_system_outage(p_s: float, p_t: float, expected: float):
    """
    arrange: Given slot outage probabilities.
    act: Combine them.
    assert: The frame outage is 1 - (1 - P_s)(1 - P_t).
    """
    assert wpt.system_outage(p_s, p_t) == pytest.approx(expected)


def test_system_outage_domain():
    """
    arrange: Given a probability above one.
    act: Combine it.
    assert: DomainError is raised.
    """
    with pytest.raises(DomainError):
        wpt.system_outage(1.5, 0.0)


def test_css_outage_profile(
    wpt_params: WptParams, frame: FrameSplit, thresholds: PowerThresholds
):
    """
    arrange: Given J = 50 SUs with 30 active.
    act: Compute the outage profile.
    assert: Inactive SUs do better, the average lies between, and beats a single SU.
    """
    profile = wpt.css_outage_profile(wpt_params, frame, thresholds, 50, 30)
    single = wpt.system_outage(
        wpt.outage_closed_form(wpt.mu_coefficient("s", wpt_params, frame, thresholds), wpt_params),
        wpt.outage_closed_form(wpt.mu_coefficient("t", wpt_params, frame, thresholds), wpt_params),
    )

    assert profile.p_inactive <= profile.p_average <= profile.p_active
    assert profile.p_average == pytest.approx(
        (30 * profile.p_active + 20 * profile.p_inactive) / 50
    )
    assert profile.p_average < single


def test_css_outage_profile_all_active(
    wpt_params: WptParams, frame: FrameSplit, thresholds: PowerThresholds
):
    """
    arrange: Given J1 = J, and then J1 = 0.
    act: Compute the outage profile.
    assert: The average equals the active outage; J1 = 0 raises DomainError.
    """
    profile = wpt.css_outage_profile(wpt_params, frame, thresholds, 10, 10)

    assert profile.p_average == pytest.approx(profile.p_active)
    with pytest.raises(DomainError):
        wpt.css_outage_profile(wpt_params, frame, thresholds, 10, 0)


def test_css_outage_monte_carlo_active_fraction(
    wpt_params: WptParams, frame: FrameSplit, thresholds: PowerThresholds, rng: np.random.Generator
):
    """
    arrange: Given a network of ten SUs over 2000 frames.
    act: Simulate per-SU activity.
    assert: The active share matches one minus the sensing outage.
    """
    sensing_outage = wpt.outage_closed_form(
        wpt.mu_coefficient("s", wpt_params, frame, thresholds), wpt_params
    )

    simulated = wpt.css_outage_monte_carlo(wpt_params, frame, thresholds, 10, 2000, rng)

    assert simulated.samples == 20_000
    assert simulated.active_fraction == pytest.approx(1.0 - sensing_outage, abs=0.02)
    assert 0.0 <= simulated.p_average <= 1.0
