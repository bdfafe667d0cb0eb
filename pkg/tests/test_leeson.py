"""Test Leeson evaluation, fitting and phase-noise synthesis."""

import logging

import numpy as np
import pytest
from scipy import signal

from yig_magnetometer.errors import DegenerateDataError, ParameterError, PhysicalDomainError
from yig_magnetometer.physics.const import COMMERCIAL_F_LEESON_HZ
from yig_magnetometer.physics.leeson import (
    estimate_phase_noise,
    evaluate_spectrum,
    fit_leeson,
    leeson_effect,
    leeson_gain_db,
    leeson_l_dbchz,
    leeson_l_half,
    naive_thermal_floor_dbm_hz,
    noise_band,
    synthesize_phase_noise,
)
from yig_magnetometer.physics.models import LeesonModel, PhaseNoiseSpectrum

from .const import MEASURED_L_100K_DBCHZ, MEASURED_L_10K_DBCHZ, MOCK_LEESON


def test_leeson_matches_measured_phase_noise(leeson):
    """Test the fitted model against the two quoted phase-noise readings."""
    assert leeson_l_dbchz(leeson, 100e3) == pytest.approx(-154.86, abs=0.01)
    assert leeson_l_dbchz(leeson, 10e3) == pytest.approx(-133.05, abs=0.01)
    assert leeson_l_dbchz(leeson, 100e3) == pytest.approx(MEASURED_L_100K_DBCHZ, abs=1)
    assert leeson_l_dbchz(leeson, 10e3) == pytest.approx(MEASURED_L_10K_DBCHZ, abs=1)


def test_leeson_l_half_shapes(leeson):
    """Test scalar and array evaluation and the white floor far from the carrier."""
    assert isinstance(leeson_l_half(leeson, 1e5), float)
    offsets = np.array([1e3, 1e4, 1e5])
    assert leeson_l_half(leeson, offsets).shape == (3,)
    # Well above f_L and f_c only the amplifier's white floor remains.
    far = leeson_l_half(leeson, 1e9) ** 2
    assert far == pytest.approx(leeson.white_floor / 2, rel=1e-3)


def test_leeson_l_half_non_increasing(rng):
    """Test that L(f) never rises with offset for random valid models."""
    offsets = np.logspace(0, 9, 400)
    for _ in range(50):
        model = LeesonModel(
            f_leeson=10 ** rng.uniform(3, 7),
            f_corner=10 ** rng.uniform(1, 5),
            noise_factor=rng.uniform(1, 20),
            p_sustain=10 ** rng.uniform(-5, -1),
        )
        assert np.all(np.diff(leeson_l_half(model, offsets)) <= 0)


def test_quadrupled_power_halves_l_half(leeson):
    """Test that four times the sustaining power halves sqrt(L), -6.02 dBc/Hz everywhere."""
    offsets = np.logspace(2, 8, 61)
    stronger = leeson.model_copy(update={"p_sustain": 4 * leeson.p_sustain})
    ratio = leeson_l_half(stronger, offsets) / leeson_l_half(leeson, offsets)
    np.testing.assert_allclose(10 * np.log10(ratio), -3.0103, atol=1e-4)
    drop = leeson_l_dbchz(stronger, offsets) - leeson_l_dbchz(leeson, offsets)
    np.testing.assert_allclose(drop, -6.0206, atol=1e-4)


# Leeson frequency well below the sample rate, so the white floor is resolved.
@pytest.fixture(name="narrow_leeson")
def narrow_leeson_fixture():
    """Oscillator with f_L = 10 kHz and f_c = 1 kHz."""
    return LeesonModel(f_leeson=10e3, f_corner=1e3, noise_factor=8.0)


def _white_floor_db(model, seed):
    phase = synthesize_phase_noise(model, 1e6, 2**18, seed=seed)
    (floor,) = estimate_phase_noise(
        phase, 1e6, nperseg=4096, bins_per_decade=1, f_min=100e3, f_max=250e3
    ).l_dbchz
    return floor


def test_noise_factor_raises_white_floor(narrow_leeson):
    """Test that a four times noisier amplifier lifts the synthesized floor by 6 dB."""
    noisier = narrow_leeson.model_copy(update={"noise_factor": 32.0})
    rise = _white_floor_db(noisier, seed=2) - _white_floor_db(narrow_leeson, seed=1)
    assert rise == pytest.approx(6.02, abs=0.5)


def test_synthesized_noise_is_two_sided_symmetric(narrow_leeson):
    """Test that +f and -f bins agree and L(f) equals the two-sided density."""
    sample_rate, nperseg = 1e6, 4096
    phase = synthesize_phase_noise(narrow_leeson, sample_rate, 2**18, seed=3)
    options = {"fs": sample_rate, "window": "hann", "nperseg": nperseg, "detrend": "linear"}
    freqs, two_sided = signal.welch(phase, return_onesided=False, **options)
    _, one_sided = signal.welch(phase, **options)
    positive = two_sided[1 : nperseg // 2]
    negative = two_sided[: nperseg // 2 : -1]
    np.testing.assert_allclose(positive, negative, rtol=1e-10)
    np.testing.assert_allclose(one_sided[1 : nperseg // 2], 2 * positive, rtol=1e-10)

    band = (freqs >= 10e3) & (freqs <= 100e3)
    (l_dbchz,) = estimate_phase_noise(
        phase, sample_rate, nperseg=nperseg, bins_per_decade=1, f_min=10e3, f_max=100e3
    ).l_dbchz
    assert l_dbchz == pytest.approx(10 * np.log10(np.mean(two_sided[band])), abs=1e-6)


@pytest.mark.parametrize("offset", [0.0, -1e3])
def test_leeson_rejects_non_positive_offsets(leeson, offset):
    """Test that offsets at or below zero are outside the model's domain."""
    with pytest.raises(PhysicalDomainError):
        leeson_l_half(leeson, offset)


def test_evaluate_spectrum(leeson):
    """Test that a tabulated spectrum carries the model values."""
    offsets = np.logspace(3, 7, 41)
    spectrum = evaluate_spectrum(leeson, offsets)
    np.testing.assert_allclose(spectrum.l_dbchz, leeson_l_dbchz(leeson, offsets))


def test_leeson_effect():
    """Test the regenerative gain below the Leeson frequency."""
    assert leeson_effect(1.0, 600e3, 600e3) == pytest.approx(2.0)
    assert leeson_effect(3.0, 60e3, 600e3) == pytest.approx(303.0)
    assert leeson_gain_db(600e3, 600e3) == pytest.approx(3.0103, abs=1e-4)


def test_narrow_resonator_advantage():
    """Test the advantage of a 600 kHz Leeson frequency over a commercial oscillator."""
    advantage = leeson_gain_db(1e3, COMMERCIAL_F_LEESON_HZ) - leeson_gain_db(1e3, 600e3)
    assert advantage == pytest.approx(18.76, abs=0.02)


def test_naive_thermal_floor():
    """Test the kT/2 reference floor at room temperature."""
    assert naive_thermal_floor_dbm_hz(300.0) == pytest.approx(-176.84, abs=0.01)


def test_fit_leeson_noiseless(leeson):
    """Test that a fit to the model's own curve returns its parameters."""
    spectrum = evaluate_spectrum(leeson, np.logspace(3, 7, 200))
    fit = fit_leeson(spectrum, leeson.p_sustain, leeson.temperature)
    assert fit.f_leeson_hz == pytest.approx(MOCK_LEESON["f_leeson"], rel=0.01)
    assert fit.f_corner_hz == pytest.approx(MOCK_LEESON["f_corner"], rel=0.01)
    assert fit.noise_factor == pytest.approx(MOCK_LEESON["noise_factor"], rel=0.01)
    assert fit.residual_rms_db < 1e-3
    assert fit.to_model().f_leeson == pytest.approx(fit.f_leeson_hz)


def test_fit_leeson_noisy(leeson, rng):
    """Test the fit against 0.2 dB measurement scatter on a dense log grid."""
    offsets = np.logspace(3, 7, 1000)
    clean = leeson_l_dbchz(leeson, offsets)
    for _ in range(100):
        noisy = PhaseNoiseSpectrum(
            offsets=offsets, l_dbchz=clean + rng.normal(0, 0.2, size=offsets.size)
        )
        fit = fit_leeson(noisy, leeson.p_sustain, leeson.temperature)
        assert fit.f_leeson_hz == pytest.approx(MOCK_LEESON["f_leeson"], rel=0.1)
        assert fit.f_corner_hz == pytest.approx(MOCK_LEESON["f_corner"], rel=0.1)
        assert fit.noise_factor == pytest.approx(MOCK_LEESON["noise_factor"], rel=0.1)


def test_fit_leeson_degenerate_data(leeson):
    """Test DegenerateDataError for a flat or too short spectrum."""
    flat = PhaseNoiseSpectrum(offsets=np.logspace(3, 6, 50), l_dbchz=np.full(50, -150.0))
    with pytest.raises(DegenerateDataError):
        fit_leeson(flat, leeson.p_sustain, leeson.temperature)

    # Only a handful of points lie above the fit's lower offset.
    short = evaluate_spectrum(leeson, np.logspace(2, 4, 30))
    with pytest.raises(DegenerateDataError):
        fit_leeson(short, leeson.p_sustain, leeson.temperature)


def test_fit_leeson_rejects_bad_operating_point(leeson):
    """Test that the sustaining power must be positive."""
    spectrum = evaluate_spectrum(leeson, np.logspace(3, 7, 50))
    with pytest.raises(ParameterError):
        fit_leeson(spectrum, 0.0, 300.0)


def test_noise_band():
    """Test the offset band a synthesized record represents."""
    low, high = noise_band(5e6, 2**20)
    assert low == pytest.approx(40 * 5e6 / 2**20)
    assert high == pytest.approx(1.25e6)


def test_synthesized_noise_follows_model(leeson):
    """Test the estimated spectrum of a synthesized record against the model."""
    sample_rate, n = 5e6, 2**20
    phase = synthesize_phase_noise(leeson, sample_rate, n, seed=7)
    assert phase.shape == (n,)
    assert phase.mean() == pytest.approx(0.0, abs=1e-12)

    low, high = noise_band(sample_rate, n)
    estimate = estimate_phase_noise(
        phase, sample_rate, nperseg=2**18, bins_per_decade=4, f_min=low, f_max=high
    )
    expected = leeson_l_dbchz(leeson, estimate.offsets)
    np.testing.assert_allclose(estimate.l_dbchz, expected, atol=2.0)


def test_synthesis_is_deterministic(leeson):
    """Test that one seed always draws the same record and another does not."""
    first = synthesize_phase_noise(leeson, 5e6, 2**14, seed=1)
    again = synthesize_phase_noise(leeson, 5e6, 2**14, seed=1)
    other = synthesize_phase_noise(leeson, 5e6, 2**14, seed=2)
    np.testing.assert_array_equal(first, again)
    assert not np.array_equal(first, other)


def test_synthesis_rejects_short_records(leeson):
    """Test that records too short for the noise band are refused."""
    with pytest.raises(ParameterError):
        synthesize_phase_noise(leeson, 5e6, 1000, seed=0)


def test_synthesis_warns_on_low_sample_rate(leeson, caplog):
    """Test the warning when the sample rate cannot cover the Leeson frequency."""
    with caplog.at_level(logging.WARNING):
        synthesize_phase_noise(leeson, 1e6, 2**14, seed=0)
    assert "below 4 f_L" in caplog.text
