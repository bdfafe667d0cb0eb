"""Leeson phase-noise model: evaluation, fitting and time-domain synthesis.

The sustaining amplifier adds white phase noise F k_B T / P_s plus flicker noise
below f_c. Inside the loop the resonator cannot track phase steps faster than
its half-width f_L, so below f_L each additive phase shift is regeneratively
accumulated and the output phase PSD grows as (f_L / f_m)^2. Noise added after
the loop (buffer amplifier, mixer) is not modelled.

Conventions: ``leeson_l_half`` is the square root of the single-sideband
quantity L(f), which is half of the single-sided phase PSD S_phi(f).
"""

from __future__ import annotations

import logging
import math

from lmfit import Parameters, minimize
import numpy as np
from scipy import signal

from ..errors import DegenerateDataError, NonConvergenceError, ParameterError, PhysicalDomainError
from .const import (
    DEFAULT_FIT_F_MIN_HZ,
    K_B,
    MIN_FIT_POINTS,
    MIN_FIT_SPAN_DB,
    MIN_NOISE_SAMPLES,
    MIN_SAMPLE_RATE_OVER_F_LEESON,
    NOISE_BAND_LOW_RECORD_MULTIPLE,
    WELCH_CHUNK_SEGMENTS,
)
from .models import LeesonFit, LeesonModel, PhaseNoiseSpectrum

_LOGGER: logging.Logger = logging.getLogger(__package__)


def _positive_offsets(f_m: float | np.ndarray) -> np.ndarray:
    offsets = np.asarray(f_m, dtype=float)
    if np.any(~(offsets > 0)):
        raise PhysicalDomainError("offset frequency must be positive")
    return offsets


def _leeson_shape(f_leeson: float, f_corner: float, offsets: np.ndarray) -> np.ndarray:
    return (f_leeson**2 / offsets**2 + 1) * (f_corner / offsets + 1)


def leeson_l_half(model: LeesonModel, f_m: float | np.ndarray) -> float | np.ndarray:
    """Square root of L(f_m), in 1/sqrt(Hz) relative to the carrier."""
    offsets = _positive_offsets(f_m)
    value = np.sqrt(
        0.5 * _leeson_shape(model.f_leeson, model.f_corner, offsets) * model.white_floor
    )
    return float(value) if value.ndim == 0 else value


def leeson_l_dbchz(model: LeesonModel, f_m: float | np.ndarray) -> float | np.ndarray:
    return 20 * np.log10(leeson_l_half(model, f_m))


def evaluate_spectrum(model: LeesonModel, offsets: np.ndarray) -> PhaseNoiseSpectrum:
    offsets = np.asarray(offsets, dtype=float)
    return PhaseNoiseSpectrum(offsets=offsets, l_dbchz=leeson_l_dbchz(model, offsets))


def leeson_effect(
    s_psi: float | np.ndarray, f_m: float | np.ndarray, f_leeson: float
) -> float | np.ndarray:
    """Output phase PSD produced by in-loop additive phase PSD ``s_psi``."""
    offsets = _positive_offsets(f_m)
    value = (1 + f_leeson**2 / offsets**2) * s_psi
    return float(value) if np.ndim(value) == 0 else value


def leeson_gain_db(f_m: float | np.ndarray, f_leeson: float) -> float | np.ndarray:
    return 10 * np.log10(leeson_effect(1.0, f_m, f_leeson))


def naive_thermal_floor_dbm_hz(temperature: float) -> float:
    """kT/2 referred to 1 mW. Reference value only; nothing is fitted to it."""
    return 10 * math.log10(K_B * temperature / 2 / 1e-3)


def _residual(
    params: Parameters, offsets: np.ndarray, data: np.ndarray, kt_over_ps: float
) -> np.ndarray:
    values = params.valuesdict()
    shape = _leeson_shape(10 ** values["log_f_leeson"], 10 ** values["log_f_corner"], offsets)
    model_db = 10 * np.log10(0.5 * shape * 10 ** values["log_noise_factor"] * kt_over_ps)
    return model_db - data


def fit_leeson(
    spectrum: PhaseNoiseSpectrum,
    p_sustain: float,
    temperature: float,
    f_min: float = DEFAULT_FIT_F_MIN_HZ,
    max_nfev: int = 2000,
) -> LeesonFit:
    """Least-squares fit of f_L, f_c and F in dB against log offset.

    All points at or above ``f_min`` carry equal weight.
    """
    if not (p_sustain > 0 and temperature > 0):
        raise ParameterError("sustaining power and temperature must be positive")
    mask = spectrum.offsets >= f_min
    offsets = spectrum.offsets[mask]
    data = spectrum.l_dbchz[mask]
    if len(offsets) < MIN_FIT_POINTS:
        raise DegenerateDataError(
            f"{len(offsets)} points above {f_min:g} Hz; at least {MIN_FIT_POINTS} are needed"
        )
    if np.ptp(data) < MIN_FIT_SPAN_DB:
        raise DegenerateDataError("spectrum is flat; the Leeson frequency is unidentifiable")

    kt_over_ps = K_B * temperature / p_sustain
    lo, hi = math.log10(offsets[0]), math.log10(offsets[-1])

    floor_db = float(np.median(data[-max(3, len(data) // 10) :]))
    above = np.nonzero(data > floor_db + 3)[0]
    f_leeson_guess = offsets[above[-1]] if len(above) else offsets[len(offsets) // 2]
    noise_factor_guess = 2 * 10 ** (floor_db / 10) / kt_over_ps

    params = Parameters()
    params.add(
        "log_f_leeson",
        value=float(np.clip(math.log10(f_leeson_guess), lo - 1, hi + 1)),
        min=lo - 2,
        max=hi + 2,
    )
    params.add("log_f_corner", value=lo, min=lo - 3, max=hi)
    params.add(
        "log_noise_factor",
        value=float(np.clip(math.log10(noise_factor_guess), -2, 7)),
        min=-3,
        max=8,
    )

    result = minimize(
        _residual,
        params,
        args=(offsets, data, kt_over_ps),
        method="leastsq",
        max_nfev=max_nfev,
    )
    if not result.success:
        raise NonConvergenceError(f"Leeson fit did not converge: {result.message}")

    values = result.params.valuesdict()
    residual_rms = float(np.sqrt(np.mean(result.residual**2)))
    _LOGGER.debug(
        "Leeson fit over %d points converged after %d evaluations, residual %.3f dB",
        len(offsets),
        result.nfev,
        residual_rms,
    )
    return LeesonFit(
        f_leeson_hz=10 ** values["log_f_leeson"],
        f_corner_hz=10 ** values["log_f_corner"],
        noise_factor=10 ** values["log_noise_factor"],
        p_sustain_w=p_sustain,
        temperature_k=temperature,
        residual_rms_db=residual_rms,
    )


def noise_band(sample_rate: float, n_samples: int) -> tuple[float, float]:
    """Offset band over which a synthesized record follows the model."""
    return NOISE_BAND_LOW_RECORD_MULTIPLE * sample_rate / n_samples, sample_rate / 4


def synthesize_phase_noise(
    model: LeesonModel, sample_rate: float, n_samples: int, seed: int
) -> np.ndarray:
    """Phase record whose spectrum follows the Leeson model.

    White Gaussian phase noise at the F k_B T / P_s floor is shaped in the
    frequency domain by sqrt([f_L^2/f^2 + 1][f_c/f + 1]) with the DC bin zeroed.
    """
    if n_samples < MIN_NOISE_SAMPLES:
        raise ParameterError(f"phase-noise synthesis needs at least {MIN_NOISE_SAMPLES} samples")
    low, high = noise_band(sample_rate, n_samples)
    if low >= high:
        raise ParameterError(
            f"record of {n_samples} samples at {sample_rate:g} Hz cannot represent "
            f"the band {low:g}-{high:g} Hz"
        )
    if sample_rate < MIN_SAMPLE_RATE_OVER_F_LEESON * model.f_leeson:
        _LOGGER.warning(
            "Sample rate %.4g Hz is below %g f_L; noise above %.4g Hz is not represented",
            sample_rate,
            MIN_SAMPLE_RATE_OVER_F_LEESON,
            sample_rate / 2,
        )

    rng = np.random.default_rng(seed)
    white = rng.standard_normal(n_samples) * math.sqrt(model.white_floor * sample_rate / 2)
    spectrum = np.fft.rfft(white)
    del white
    freqs = np.fft.rfftfreq(n_samples, d=1 / sample_rate)
    spectrum[0] = 0
    spectrum[1:] *= np.sqrt(_leeson_shape(model.f_leeson, model.f_corner, freqs[1:]))
    return np.fft.irfft(spectrum, n=n_samples)


def _chunked_welch(
    phase: np.ndarray, sample_rate: float, nperseg: int
) -> tuple[np.ndarray, np.ndarray]:
    # Bounded memory: average Welch estimates of consecutive chunks, weighted by length.
    chunk = WELCH_CHUNK_SEGMENTS * nperseg
    total = None
    weight = 0
    for start in range(0, len(phase), chunk):
        piece = phase[start : start + chunk]
        if len(piece) < nperseg and total is not None:
            break
        freqs, s_phi = signal.welch(
            piece,
            fs=sample_rate,
            window="hann",
            nperseg=min(nperseg, len(piece)),
            detrend="linear",
            scaling="density",
        )
        total = s_phi * len(piece) if total is None else total + s_phi * len(piece)
        weight += len(piece)
    return freqs, total / weight


def estimate_phase_noise(
    phase: np.ndarray,
    sample_rate: float,
    nperseg: int | None = None,
    bins_per_decade: int = 10,
    f_min: float | None = None,
    f_max: float | None = None,
) -> PhaseNoiseSpectrum:
    """Log-binned L(f) of a phase record, from a Welch estimate with a Hann window."""
    phase = np.asarray(phase, dtype=float)
    if nperseg is None:
        nperseg = max(len(phase) // 4, 16)
    freqs, s_phi = _chunked_welch(phase, sample_rate, nperseg)
    freqs, s_phi = freqs[1:], s_phi[1:]
    low = freqs[0] if f_min is None else f_min
    high = freqs[-1] if f_max is None else f_max
    keep = (freqs >= low) & (freqs <= high)
    freqs, s_phi = freqs[keep], s_phi[keep]
    if len(freqs) == 0:
        raise ParameterError(f"no spectral bins between {low:g} and {high:g} Hz")

    n_bins = max(1, math.ceil(bins_per_decade * math.log10(high / low)))
    edges = np.logspace(math.log10(low), math.log10(high), n_bins + 1)
    index = np.clip(np.searchsorted(edges, freqs, side="right") - 1, 0, n_bins - 1)
    counts = np.bincount(index, minlength=n_bins)
    mean_psd = np.bincount(index, weights=s_phi, minlength=n_bins)
    mean_log_f = np.bincount(index, weights=np.log(freqs), minlength=n_bins)
    filled = counts > 0
    offsets = np.exp(mean_log_f[filled] / counts[filled])
    l_linear = mean_psd[filled] / counts[filled] / 2
    return PhaseNoiseSpectrum(offsets=offsets, l_dbchz=10 * np.log10(l_linear))
