"""Magnetic field to oscillator waveform.

The oscillator phase is the time integral of gamma * (B0 + B_sen). The physical
carrier near 5 GHz is never sampled: callers pass ``carrier_offset`` so that the
numeric carrier lands at a representable frequency, which stands in for the
signal after an ideal frequency translation. Phase deviations do not depend on
the carrier frequency, so nothing is lost.
"""

from __future__ import annotations

import logging
import math

import numpy as np
from scipy import integrate, special

from ..errors import (
    AliasingError,
    BinNotFoundError,
    NyquistError,
    ParameterError,
    PhysicalDomainError,
)
from .const import GAMMA, GAMMA_HZ_PER_TESLA, NARROWBAND_FM_MAX_INDEX, OCCUPIED_POWER_FRACTION
from .leeson import synthesize_phase_noise
from .models import FieldSeries, LeesonModel, SidebandReading, SidebandSpectrum, Waveform

_LOGGER: logging.Logger = logging.getLogger(__package__)


def fractional_cycles(frequency_hz: float, sample_rate: float, n_samples: int) -> np.ndarray:
    """frac(f * n / fs) for n = 0..N-1 without forming the large product f * t.

    The per-sample ratio is split as hi + lo with hi carrying few enough bits
    that n * hi is exact in float64.
    """
    ratio = frequency_hz / sample_rate
    ratio -= math.floor(ratio)
    bits = max(n_samples - 1, 1).bit_length()
    scale = 2.0 ** (53 - bits)
    ratio_hi = math.floor(ratio * scale) / scale
    ratio_lo = ratio - ratio_hi
    index = np.arange(n_samples, dtype=np.float64)
    cycles = np.mod(index * ratio_hi, 1.0)
    cycles += index * ratio_lo
    return np.mod(cycles, 1.0, out=cycles)


def deviation_phase(field: FieldSeries) -> np.ndarray:
    """gamma times the trapezoidal integral of B_sen, starting from zero."""
    return GAMMA * integrate.cumulative_trapezoid(
        field.samples, dx=1 / field.sample_rate, initial=0
    )


def integrate_phase(field: FieldSeries) -> np.ndarray:
    """Total oscillator phase, gamma * B0 * t plus the deviation phase."""
    return GAMMA * field.b0 * field.times + deviation_phase(field)


def modulation_bandwidth(field: FieldSeries) -> float:
    """Carson half-bandwidth: peak frequency deviation plus highest modulation frequency."""
    samples = field.samples
    if not np.any(samples):
        return 0.0
    power = np.abs(np.fft.rfft(samples)) ** 2
    # DC shifts the carrier and is counted in the deviation.
    power[0] = 0
    total = power.sum()
    f_mod = 0.0
    if total > 0:
        k = int(np.searchsorted(np.cumsum(power), OCCUPIED_POWER_FRACTION * total))
        f_mod = k * field.sample_rate / field.n_samples
    return f_mod + GAMMA_HZ_PER_TESLA * float(np.max(np.abs(samples)))


def carrier_offset_for(b0: float, target_hz: float) -> float:
    """Offset that places the numeric carrier of bias ``b0`` at ``target_hz``."""
    return target_hz - GAMMA_HZ_PER_TESLA * b0


def synthesize_waveform(
    field: FieldSeries,
    leeson: LeesonModel | None = None,
    carrier_offset: float = 0.0,
    seed: int = 0,
    amplitude_noise: np.ndarray | None = None,
    phase_noise: np.ndarray | None = None,
) -> Waveform:
    """Unit-amplitude oscillator output cos(phi + phi_noise) at the shifted carrier.

    ``phase_noise`` reuses a realization already drawn with
    ``synthesize_phase_noise``; otherwise one is drawn from ``leeson`` and ``seed``.
    ``amplitude_noise`` is a zero-mean multiplicative term alpha(t).
    """
    n = field.n_samples
    carrier_hz = GAMMA_HZ_PER_TESLA * field.b0 + carrier_offset
    bandwidth = modulation_bandwidth(field)
    if carrier_hz - bandwidth <= 0 or field.sample_rate <= 2 * (carrier_hz + bandwidth):
        raise NyquistError(
            f"carrier {carrier_hz:.6g} Hz with {bandwidth:.4g} Hz of modulation does not "
            f"fit below {field.sample_rate / 2:.6g} Hz"
        )

    phase = 2 * np.pi * fractional_cycles(carrier_hz, field.sample_rate, n)
    phase += deviation_phase(field)
    if phase_noise is None and leeson is not None:
        phase_noise = synthesize_phase_noise(leeson, field.sample_rate, n, seed)
    if phase_noise is not None:
        if len(phase_noise) != n:
            raise ParameterError("phase-noise record length differs from the field")
        phase += phase_noise

    samples = np.cos(phase, out=phase)
    if amplitude_noise is not None:
        if len(amplitude_noise) != n:
            raise ParameterError("amplitude-noise record length differs from the field")
        samples *= 1 + np.asarray(amplitude_noise, dtype=float)
    return Waveform(
        sample_rate=field.sample_rate,
        samples=samples,
        carrier_hz=carrier_hz,
        bandwidth_hz=bandwidth,
    )


def modulation_index(b_rms: float, omega_m: float) -> float:
    if not omega_m > 0:
        raise PhysicalDomainError("modulation frequency must be positive")
    return math.sqrt(2) * GAMMA * b_rms / omega_m


def predict_sideband(b_rms: float, omega_m: float) -> float:
    """Carrier-normalized amplitude of each first-order FM sideband."""
    beta = modulation_index(b_rms, omega_m)
    if beta > NARROWBAND_FM_MAX_INDEX:
        _LOGGER.warning(
            "Modulation index %.3g exceeds %g; the narrowband sideband estimate is inaccurate",
            beta,
            NARROWBAND_FM_MAX_INDEX,
        )
    return GAMMA * b_rms / (math.sqrt(2) * omega_m)


def sideband_spectrum_exact(b_rms: float, omega_m: float, k_max: int) -> SidebandSpectrum:
    """Bessel amplitudes J_k(beta) for k = -k_max..k_max."""
    if k_max < 1:
        raise ParameterError("k_max must be at least 1")
    beta = modulation_index(b_rms, omega_m)
    orders = np.arange(-k_max, k_max + 1)
    return SidebandSpectrum(orders=orders, amplitudes=special.jv(orders, beta))


def bin_index(frequency_hz: float, sample_rate: float, n_samples: int) -> int:
    position = frequency_hz * n_samples / sample_rate
    index = round(position)
    if abs(position - index) > 1e-6:
        raise BinNotFoundError(f"{frequency_hz:g} Hz does not fall on a DFT bin")
    return index


def measure_sidebands(waveform: Waveform, f_m: float) -> SidebandReading:
    """Complex carrier and first-sideband amplitudes read from the DFT.

    Carrier and modulation frequency must both sit on DFT bins.
    """
    n = waveform.n_samples
    spectrum = np.fft.rfft(waveform.samples) / (n / 2)
    carrier = bin_index(waveform.carrier_hz, waveform.sample_rate, n)
    offset = bin_index(f_m, waveform.sample_rate, n)
    if carrier - offset < 1 or carrier + offset >= len(spectrum):
        raise BinNotFoundError(f"sidebands at +-{f_m:g} Hz fall outside the spectrum")
    return SidebandReading(
        carrier=complex(spectrum[carrier]),
        lower=complex(spectrum[carrier - offset]),
        upper=complex(spectrum[carrier + offset]),
    )


def _folded(frequency_hz: float, sample_rate: float) -> float:
    return abs((frequency_hz + sample_rate / 2) % sample_rate - sample_rate / 2)


def mix_down(w: Waveform, lo_hz: float, if_hz: float | None = None) -> Waveform:
    """Multiply by cos(2 pi lo t), keep the difference band, restore unit carrier.

    The low-pass is a brick wall at a quarter of the sample rate.
    """
    if lo_hz >= w.carrier_hz:
        raise AliasingError(
            f"LO {lo_hz:g} Hz must lie below the carrier {w.carrier_hz:g} Hz"
        )
    difference = w.carrier_hz - lo_hz
    if if_hz is not None and not math.isclose(difference, if_hz, rel_tol=1e-9, abs_tol=1e-6):
        raise ParameterError(
            f"LO {lo_hz:g} Hz maps the carrier to {difference:g} Hz, not {if_hz:g} Hz"
        )
    cutoff = w.sample_rate / 4
    if difference - w.bandwidth_hz <= 0 or difference + w.bandwidth_hz >= cutoff:
        raise AliasingError(
            f"difference band {difference:g} +- {w.bandwidth_hz:g} Hz leaves (0, {cutoff:g}) Hz"
        )
    image = _folded(w.carrier_hz + lo_hz, w.sample_rate)
    if image - w.bandwidth_hz <= cutoff:
        raise AliasingError(f"image band at {image:g} Hz overlaps the difference band")

    n = w.n_samples
    lo = np.cos(2 * np.pi * fractional_cycles(lo_hz, w.sample_rate, n))
    spectrum = np.fft.rfft(w.samples * lo)
    spectrum[np.fft.rfftfreq(n, d=1 / w.sample_rate) > cutoff] = 0
    return Waveform(
        sample_rate=w.sample_rate,
        samples=2 * np.fft.irfft(spectrum, n=n),
        carrier_hz=difference,
        bandwidth_hz=w.bandwidth_hz,
    )
