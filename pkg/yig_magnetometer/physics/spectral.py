"""Spectral estimation of recovered fields and the phase-noise to sensitivity map.

ASD normalization, per segment of L samples with window w:

    S[k] = 2 |DFT(w x)[k]|^2 / (fs * sum(w^2))     for 0 < k < L/2
    S[L/2] = |DFT(w x)[L/2]|^2 / (fs * sum(w^2))    (Nyquist bin, even L)

DC is dropped. Segment spectra are power-averaged (rms average of the ASD).
A sinusoid of rms amplitude A centred on a bin of a rectangular-window segment
of duration T reads A * sqrt(T), so with 1 s segments the bin reads A directly.
"""

from __future__ import annotations

import logging
import math
from typing import Callable, Iterator, NamedTuple, Sequence

import numpy as np
from scipy import signal

from ..errors import BinNotFoundError, ParameterError, PhysicalDomainError, RecordTooShortError
from .const import DEFAULT_SEGMENT_S, DEFAULT_TUKEY_ALPHA, GAMMA, GAMMA_HZ_PER_TESLA, K_B
from .models import AsdSpectrum, FieldSeries, LeesonModel

_LOGGER: logging.Logger = logging.getLogger(__package__)

SensitivityCurve = Callable[[float | np.ndarray], float | np.ndarray]


class ClosedFormSensitivity(NamedTuple):
    curve: SensitivityCurve
    plateau: float


def _segment_powers(
    field: FieldSeries, segment_seconds: float, tukey_alpha: float
) -> tuple[np.ndarray, Iterator[np.ndarray], int]:
    if not 0 <= tukey_alpha <= 1:
        raise ParameterError(f"Tukey alpha {tukey_alpha} outside [0, 1]")
    fs = field.sample_rate
    length = int(round(segment_seconds * fs))
    count = field.n_samples // length if length >= 2 else 0
    if count < 2:
        raise RecordTooShortError(
            f"{field.duration:g} s record holds fewer than two {segment_seconds:g} s segments"
        )

    samples = field.samples
    if field.flagged_samples:
        samples = samples.copy()
        samples[list(field.flagged_samples)] = 0

    window = signal.windows.tukey(length, tukey_alpha, sym=False)
    scale = 2 / (fs * float(np.sum(window**2)))
    freqs = np.fft.rfftfreq(length, d=1 / fs)[1:]

    def powers() -> Iterator[np.ndarray]:
        for i in range(count):
            spectrum = np.fft.rfft(samples[i * length : (i + 1) * length] * window)[1:]
            power = np.abs(spectrum) ** 2 * scale
            if length % 2 == 0:
                power[-1] /= 2
            yield power

    return freqs, powers(), count


def _to_spectrum(
    freqs: np.ndarray, power: np.ndarray, psd: bool, tukey_alpha: float, segments: int
) -> AsdSpectrum:
    return AsdSpectrum(
        freqs=freqs,
        asd=power if psd else np.sqrt(power),
        psd=psd,
        tukey_alpha=tukey_alpha,
        segments=segments,
    )


def field_asd(
    field: FieldSeries,
    segment_seconds: float = DEFAULT_SEGMENT_S,
    tukey_alpha: float = DEFAULT_TUKEY_ALPHA,
    psd: bool = False,
) -> AsdSpectrum:
    """Segment-averaged single-sided ASD in T/sqrt(Hz), or T^2/Hz with ``psd``."""
    freqs, powers, count = _segment_powers(field, segment_seconds, tukey_alpha)
    total = np.zeros_like(freqs)
    for power in powers:
        total += power
    return _to_spectrum(freqs, total / count, psd, tukey_alpha, count)


def segment_asds(
    field: FieldSeries,
    segment_seconds: float = DEFAULT_SEGMENT_S,
    tukey_alpha: float = DEFAULT_TUKEY_ALPHA,
    psd: bool = False,
) -> list[AsdSpectrum]:
    freqs, powers, _ = _segment_powers(field, segment_seconds, tukey_alpha)
    return [_to_spectrum(freqs, power, psd, tukey_alpha, 1) for power in powers]


def average_spectra(spectra: Sequence[AsdSpectrum]) -> AsdSpectrum:
    """Power average of spectra sharing one binning."""
    if not spectra:
        raise ParameterError("no spectra to average")
    first = spectra[0]
    _check_shared_binning(spectra)
    total = np.zeros_like(first.freqs)
    weight = 0
    for spectrum in spectra:
        power = spectrum.asd if spectrum.psd else spectrum.asd**2
        total += power * spectrum.segments
        weight += spectrum.segments
    return _to_spectrum(first.freqs, total / weight, first.psd, first.tukey_alpha, weight)


def _check_shared_binning(spectra: Sequence[AsdSpectrum]) -> None:
    first = spectra[0].freqs
    for spectrum in spectra[1:]:
        if len(spectrum.freqs) != len(first) or not np.array_equal(spectrum.freqs, first):
            raise ParameterError("spectra do not share a common binning")


def _bin_of(asd: AsdSpectrum, frequency_hz: float) -> int:
    index = int(round(frequency_hz / asd.resolution_hz)) - 1
    if not 0 <= index < len(asd.freqs) or not math.isclose(
        asd.freqs[index], frequency_hz, rel_tol=0, abs_tol=1e-6 * asd.resolution_hz
    ):
        raise BinNotFoundError(f"no {frequency_hz:g} Hz bin in a {asd.resolution_hz:g} Hz grid")
    return index


def bin_value(asd: AsdSpectrum, frequency_hz: float) -> float:
    return asd.value_at(_bin_of(asd, frequency_hz))


def chop_detect(asd_series: Sequence[AsdSpectrum], bin_hz: float) -> np.ndarray:
    """Value of the ``bin_hz`` bin in each spectrum, in order."""
    if not asd_series:
        return np.zeros(0)
    _check_shared_binning(asd_series)
    index = _bin_of(asd_series[0], bin_hz)
    return np.array([spectrum.value_at(index) for spectrum in asd_series])


def noise_floor(
    asd: AsdSpectrum,
    band: tuple[float, float],
    exclude: Sequence[float] = (),
    guard_bins: int = 2,
) -> float:
    """RMS spectral density inside ``band``, skipping bins near ``exclude``."""
    low, high = band
    keep = (asd.freqs >= low) & (asd.freqs <= high)
    for frequency in exclude:
        keep &= np.abs(asd.freqs - frequency) > guard_bins * asd.resolution_hz
    if not np.any(keep):
        raise BinNotFoundError(f"no bins left in {low:g}-{high:g} Hz")
    power = asd.asd[keep] if asd.psd else asd.asd[keep] ** 2
    value = float(np.mean(power))
    return value if asd.psd else math.sqrt(value)


def median_smooth(values: np.ndarray, width: int) -> np.ndarray:
    """Running median. Presentation aid only."""
    if width < 1 or width % 2 == 0:
        raise ParameterError("median width must be a positive odd number")
    return signal.medfilt(np.asarray(values, dtype=float), kernel_size=width)


def sensitivity_from_phase_noise(
    l_half: Callable[[np.ndarray], float | np.ndarray], known_phase: bool = False
) -> SensitivityCurve:
    """Field ASD equivalent to a phase-noise curve: sqrt(2) f_m / (gamma/2pi) L^(1/2).

    ``known_phase`` drops the sqrt(2) for synchronous detection of a field of
    known phase.
    """
    factor = 1.0 if known_phase else math.sqrt(2)

    def sensitivity(f_m: float | np.ndarray) -> float | np.ndarray:
        offsets = np.asarray(f_m, dtype=float)
        if np.any(~(offsets > 0)):
            raise PhysicalDomainError("offset frequency must be positive")
        value = factor * offsets / GAMMA_HZ_PER_TESLA * np.asarray(l_half(offsets))
        return float(value) if value.ndim == 0 else value

    return sensitivity


def sensitivity_leeson_closed_form(model: LeesonModel) -> ClosedFormSensitivity:
    """Full Leeson-limited sensitivity and its f_c << f_m << f_L plateau.

    plateau = (1/2) (kappa_L / gamma) sqrt(F k_B T / P_s), kappa_L = 4 pi f_L.
    """
    floor = model.white_floor

    def curve(f_m: float | np.ndarray) -> float | np.ndarray:
        f = np.asarray(f_m, dtype=float)
        if np.any(~(f > 0)):
            raise PhysicalDomainError("offset frequency must be positive")
        value = (f / GAMMA_HZ_PER_TESLA) * np.sqrt(
            (model.f_leeson**2 / f**2 + 1) * (model.f_corner / f + 1) * floor
        )
        return float(value) if value.ndim == 0 else value

    kappa_l = 4 * math.pi * model.f_leeson
    return ClosedFormSensitivity(curve=curve, plateau=0.5 * kappa_l / GAMMA * math.sqrt(floor))


def ideal_interferometer_sensitivity(
    kappa_l: float, p_sustain: float, temperature: float
) -> float:
    """Plateau with a noiseless amplifier (F = 1)."""
    return 0.5 * kappa_l / GAMMA * math.sqrt(K_B * temperature / p_sustain)
