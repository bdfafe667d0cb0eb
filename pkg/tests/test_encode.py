"""Test field-to-waveform synthesis and the FM sideband helpers."""

import logging
import math

import numpy as np
import pytest

from yig_magnetometer.errors import (
    AliasingError,
    BinNotFoundError,
    NyquistError,
    ParameterError,
    PhysicalDomainError,
)
from yig_magnetometer.physics.const import GAMMA, GAMMA_HZ_PER_TESLA
from yig_magnetometer.physics.encode import (
    bin_index,
    carrier_offset_for,
    deviation_phase,
    fractional_cycles,
    integrate_phase,
    measure_sidebands,
    mix_down,
    modulation_bandwidth,
    modulation_index,
    predict_sideband,
    sideband_spectrum_exact,
    synthesize_waveform,
)
from yig_magnetometer.physics.models import FieldSeries

from .const import TWO_PI

SAMPLE_RATE = 50e6
CARRIER = 10e6


def _tone_field(b_rms, f_m, sample_rate=SAMPLE_RATE, duration=1e-3):
    n = int(round(duration * sample_rate))
    cycles = fractional_cycles(f_m, sample_rate, n)
    return FieldSeries(
        sample_rate=sample_rate, samples=math.sqrt(2) * b_rms * np.cos(TWO_PI * cycles)
    )


def test_fractional_cycles_exact_for_long_records():
    """Test the carrier phase against exact rational arithmetic over 2^20 samples."""
    n = 2**20
    cycles = fractional_cycles(35e3, 5e6, n)
    exact = (np.arange(n) * 7 % 1000) / 1000
    wrapped = (cycles - exact + 0.5) % 1.0 - 0.5
    assert np.max(np.abs(wrapped)) < 1e-12
    assert np.all((cycles >= 0) & (cycles < 1))


def test_deviation_phase_of_constant_field():
    """Test that a static offset field advances the phase linearly."""
    field = FieldSeries(sample_rate=1e6, samples=np.full(1001, 1e-9))
    phase = deviation_phase(field)
    assert phase[0] == 0
    assert phase[-1] == pytest.approx(GAMMA * 1e-9 * 1e-3)
    total = integrate_phase(field)
    assert total[-1] - phase[-1] == pytest.approx(GAMMA * field.b0 * 1e-3)


def test_deviation_phase_closed_form():
    """Test the trapezoid phase of a tone against sqrt(2) (gamma B / omega_m) sin(omega_m t)."""
    b_rms, f_m = 1e-9, 10e3
    field = _tone_field(b_rms, f_m)
    omega_m = TWO_PI * f_m
    expected = math.sqrt(2) * GAMMA * b_rms / omega_m * np.sin(omega_m * field.times)
    amplitude = math.sqrt(2) * GAMMA * b_rms / omega_m
    np.testing.assert_allclose(deviation_phase(field), expected, rtol=0, atol=1e-6 * amplitude)
    carrier = GAMMA * field.b0 * field.times
    np.testing.assert_allclose(
        integrate_phase(field) - carrier, expected, rtol=0, atol=1e-6 * amplitude
    )


def test_negated_field_negates_deviation(rng):
    """Test that the deviation phase is odd in the field."""
    field = FieldSeries(sample_rate=1e6, samples=rng.normal(0, 1e-9, 4096))
    negated = FieldSeries(sample_rate=1e6, samples=-field.samples)
    np.testing.assert_array_equal(deviation_phase(negated), -deviation_phase(field))


@pytest.mark.parametrize("b_rms", [0.0, 1e-12, 1e-10, 1e-9])
def test_dft_energy_independent_of_modulation(b_rms):
    """Test that frequency modulation moves power between bins without changing the total."""
    field = _tone_field(b_rms, 100e3)
    waveform = synthesize_waveform(field, carrier_offset=carrier_offset_for(field.b0, CARRIER))
    n = waveform.n_samples
    energy = np.sum(np.abs(np.fft.fft(waveform.samples)) ** 2) / n**2
    assert energy == pytest.approx(0.5, abs=1e-9)


def test_modulation_bandwidth():
    """Test the Carson half-bandwidth of a single tone."""
    field = _tone_field(1e-6, 1e6)
    expected = 1e6 + GAMMA_HZ_PER_TESLA * math.sqrt(2) * 1e-6
    assert modulation_bandwidth(field) == pytest.approx(expected, rel=1e-6)
    silent = FieldSeries(sample_rate=1e6, samples=np.zeros(100))
    assert modulation_bandwidth(silent) == 0.0


def test_carrier_offset_places_carrier():
    """Test that the offset moves the bias resonance onto the requested carrier."""
    offset = carrier_offset_for(0.178, CARRIER)
    assert GAMMA_HZ_PER_TESLA * 0.178 + offset == pytest.approx(CARRIER, abs=1e-6)


def test_one_picotesla_sideband():
    """Test the sideband of 1 pT rms at 100 kHz, predicted and measured."""
    predicted = predict_sideband(1e-12, TWO_PI * 100e3)
    assert 20 * math.log10(predicted) == pytest.approx(-134.07, abs=0.01)

    field = _tone_field(1e-12, 100e3)
    waveform = synthesize_waveform(field, carrier_offset=carrier_offset_for(field.b0, CARRIER))
    reading = measure_sidebands(waveform, 100e3)
    assert abs(reading.carrier) == pytest.approx(1.0, rel=1e-6)
    measured_db = 20 * math.log10(reading.ratio)
    assert measured_db == pytest.approx(20 * math.log10(predicted), abs=0.2)


def test_sidebands_have_opposite_sign():
    """Test that the lower FM sideband is the negated mirror of the upper one."""
    field = _tone_field(1e-9, 100e3)
    waveform = synthesize_waveform(field, carrier_offset=carrier_offset_for(field.b0, CARRIER))
    reading = measure_sidebands(waveform, 100e3)
    lower = reading.lower / reading.carrier
    upper = reading.upper / reading.carrier
    assert abs(lower) == pytest.approx(abs(upper), rel=1e-6)
    assert (lower * upper).real < 0


def test_modulation_index():
    """Test beta = sqrt(2) gamma B_rms / omega_m and its domain."""
    assert modulation_index(2.12e-6, TWO_PI * 1e6) == pytest.approx(0.08395, rel=1e-3)
    with pytest.raises(PhysicalDomainError):
        modulation_index(1e-12, 0.0)


def test_predict_sideband_warns_outside_narrowband(caplog):
    """Test the warning when the narrowband estimate no longer holds."""
    with caplog.at_level(logging.WARNING):
        predict_sideband(2.12e-6, TWO_PI * 100e3)
    assert "narrowband" in caplog.text


@pytest.mark.parametrize("beta_target", [1e-3, 0.1, 1.0, 5.0])
def test_bessel_power_conservation(beta_target):
    """Test that carrier and sideband powers sum to the carrier power."""
    omega_m = TWO_PI * 1e6
    b_rms = beta_target * omega_m / (math.sqrt(2) * GAMMA)
    spectrum = sideband_spectrum_exact(b_rms, omega_m, k_max=30)
    assert np.sum(spectrum.amplitudes**2) == pytest.approx(1.0, abs=1e-10)
    assert len(spectrum.orders) == 61


def test_exact_sideband_matches_narrowband():
    """Test J_1(beta) against the first-order estimate for small beta."""
    omega_m = TWO_PI * 1e6
    spectrum = sideband_spectrum_exact(1e-9, omega_m, k_max=2)
    first = spectrum.amplitudes[list(spectrum.orders).index(1)]
    assert first == pytest.approx(predict_sideband(1e-9, omega_m), rel=1e-6)
    with pytest.raises(ParameterError):
        sideband_spectrum_exact(1e-9, omega_m, k_max=0)


def test_bin_index():
    """Test that off-grid frequencies have no bin."""
    assert bin_index(100e3, SAMPLE_RATE, 50000) == 100
    with pytest.raises(BinNotFoundError):
        bin_index(100.5e3, SAMPLE_RATE, 50000)


def test_synthesize_rejects_unrepresentable_carrier():
    """Test NyquistError when the carrier does not fit below half the sample rate."""
    field = _tone_field(1e-9, 10e3, sample_rate=1e6)
    with pytest.raises(NyquistError):
        synthesize_waveform(field, carrier_offset=carrier_offset_for(field.b0, CARRIER))


def test_synthesize_checks_noise_lengths():
    """Test that supplied noise records must match the field length."""
    field = _tone_field(1e-9, 100e3)
    offset = carrier_offset_for(field.b0, CARRIER)
    with pytest.raises(ParameterError):
        synthesize_waveform(field, carrier_offset=offset, phase_noise=np.zeros(10))
    with pytest.raises(ParameterError):
        synthesize_waveform(field, carrier_offset=offset, amplitude_noise=np.zeros(10))


def test_synthesize_with_leeson_noise_is_seeded(leeson):
    """Test that the drawn phase noise depends only on the seed."""
    field = _tone_field(1e-12, 100e3)
    offset = carrier_offset_for(field.b0, CARRIER)
    first = synthesize_waveform(field, leeson=leeson, carrier_offset=offset, seed=4)
    again = synthesize_waveform(field, leeson=leeson, carrier_offset=offset, seed=4)
    clean = synthesize_waveform(field, carrier_offset=offset)
    np.testing.assert_array_equal(first.samples, again.samples)
    assert not np.array_equal(first.samples, clean.samples)
    assert np.max(np.abs(first.samples)) <= 1.0


def test_mix_down_preserves_sidebands():
    """Test that translating to 1 MHz keeps the carrier and sideband amplitudes."""
    field = _tone_field(1e-9, 100e3)
    waveform = synthesize_waveform(field, carrier_offset=carrier_offset_for(field.b0, CARRIER))
    mixed = mix_down(waveform, 9e6, if_hz=1e6)
    assert mixed.carrier_hz == pytest.approx(1e6)
    before = measure_sidebands(waveform, 100e3)
    after = measure_sidebands(mixed, 100e3)
    assert abs(after.carrier) == pytest.approx(abs(before.carrier), rel=1e-9)
    assert after.ratio == pytest.approx(before.ratio, rel=1e-6)


@pytest.mark.parametrize(
    "lo_hz, if_hz, error",
    [
        (11e6, None, AliasingError),
        (9e6, 2e6, ParameterError),
        # The sum band folds back to 11 MHz, inside the pass band.
        (1e6, None, AliasingError),
    ],
)
def test_mix_down_rejects_bad_plans(lo_hz, if_hz, error):
    """Test the frequency-plan checks of the mixer."""
    field = _tone_field(1e-9, 100e3)
    waveform = synthesize_waveform(field, carrier_offset=carrier_offset_for(field.b0, CARRIER))
    with pytest.raises(error):
        mix_down(waveform, lo_hz, if_hz=if_hz)
