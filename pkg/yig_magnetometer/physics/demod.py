"""Hilbert-transform demodulation of an intermediate-frequency waveform.

The analytic signal isolates the phase from additive amplitude noise as long as
the modulation stays well inside (0, 2 * if) (Bedrosian). The field follows
from the instantaneous frequency: B_sen = (dphi/dt + 2 pi lo_offset) / gamma - B0.
"""

from __future__ import annotations

import logging
import math

import numpy as np
from scipy import signal

from ..errors import RecordTooShortError, UnwrapIntegrityError
from .const import (
    BEDROSIAN_BAND_FRACTION,
    BEDROSIAN_POWER_TOLERANCE,
    BLOCK_MARGIN_SAMPLES,
    GAMMA,
    GAMMA_HZ_PER_TESLA,
)
from .models import AnalyticSignal, FieldSeries, Waveform

_LOGGER: logging.Logger = logging.getLogger(__package__)


def _check_bedrosian(w: Waveform) -> None:
    power = np.abs(np.fft.rfft(w.samples)) ** 2
    total = power.sum()
    if total == 0:
        return
    freqs = np.fft.rfftfreq(w.n_samples, d=1 / w.sample_rate)
    fraction = power[freqs < BEDROSIAN_BAND_FRACTION * w.carrier_hz].sum() / total
    if fraction > BEDROSIAN_POWER_TOLERANCE:
        _LOGGER.warning(
            "%.3g of the signal power lies below %.4g Hz; modulation reaches within "
            "%d%% of the %.4g Hz carrier and the Hilbert phase is unreliable",
            fraction,
            BEDROSIAN_BAND_FRACTION * w.carrier_hz,
            round(100 * BEDROSIAN_BAND_FRACTION),
            w.carrier_hz,
        )


def analytic_signal(
    w: Waveform, block_size: int | None = None, margin: int = BLOCK_MARGIN_SAMPLES
) -> AnalyticSignal:
    """v + i H[v], built by zeroing negative-frequency DFT bins.

    With ``block_size`` the record is processed in blocks that borrow ``margin``
    samples on each side; only the block interior is kept.
    """
    _check_bedrosian(w)
    samples = w.samples
    n = len(samples)
    if block_size is None or block_size >= n:
        analytic = signal.hilbert(samples)
    else:
        analytic = np.empty(n, dtype=np.complex128)
        for start in range(0, n, block_size):
            stop = min(start + block_size, n)
            lo, hi = max(start - margin, 0), min(stop + margin, n)
            analytic[start:stop] = signal.hilbert(samples[lo:hi])[start - lo : stop - lo]
    zeros = np.flatnonzero(analytic == 0)
    if len(zeros):
        raise UnwrapIntegrityError(f"analytic signal vanishes at sample {zeros[0]}")
    return AnalyticSignal(sample_rate=w.sample_rate, samples=analytic, if_hz=w.carrier_hz)


def _phase_steps(a: AnalyticSignal) -> np.ndarray:
    """Principal per-sample phase increments, after checking they are unambiguous."""
    if 2 * a.if_hz >= a.sample_rate:
        raise UnwrapIntegrityError(
            f"carrier {a.if_hz:g} Hz advances at least pi per sample at {a.sample_rate:g} Hz"
        )
    samples = a.samples
    steps = np.angle(samples[1:] * np.conj(samples[:-1]))
    if len(steps) == 0:
        return steps
    ambiguous = np.flatnonzero(np.abs(steps) >= math.pi * (1 - 1e-12))
    if len(ambiguous):
        raise UnwrapIntegrityError(f"phase step of pi at sample {ambiguous[0]}")
    nominal = 2 * math.pi * a.if_hz / a.sample_rate
    if abs(float(np.mean(steps)) - nominal) > math.pi / 2:
        raise UnwrapIntegrityError(
            "mean phase step disagrees with the carrier; the record is undersampled"
        )
    return steps


def unwrap_phase(a: AnalyticSignal) -> np.ndarray:
    """Raw phase plus whole turns counted as integers.

    Subtracting ``2 pi`` times the turn count gives back ``np.angle`` of the samples.
    """
    steps = _phase_steps(a)
    raw = np.angle(a.samples)
    turns = np.cumsum(np.round((steps - np.diff(raw)) / (2 * math.pi)).astype(np.int64))
    return raw + 2 * math.pi * np.concatenate(([0], turns))


def recover_field(a: AnalyticSignal, b0: float, lo_offset_hz: float) -> FieldSeries:
    """Field beyond the bias from the instantaneous frequency of ``a``.

    ``lo_offset_hz`` is the total downward translation between the physical
    carrier gamma * B0 / 2 pi and the carrier of ``a``. The derivative is a
    central difference; the first and last samples use one-sided differences
    and are listed in ``flagged_samples``.
    """
    n = len(a.samples)
    if n < 3:
        raise RecordTooShortError("field recovery needs at least 3 samples")
    steps = _phase_steps(a)

    rate = np.empty(n)
    rate[1:-1] = (steps[:-1] + steps[1:]) * (a.sample_rate / 2)
    rate[0] = steps[0] * a.sample_rate
    rate[-1] = steps[-1] * a.sample_rate

    f_if = GAMMA_HZ_PER_TESLA * b0 - lo_offset_hz
    if not math.isclose(f_if, a.if_hz, rel_tol=1e-6):
        _LOGGER.debug(
            "Bias and LO offset place the carrier at %.9g Hz, signal reports %.9g Hz",
            f_if,
            a.if_hz,
        )
    rate -= 2 * math.pi * f_if
    return FieldSeries(
        sample_rate=a.sample_rate,
        samples=rate / GAMMA,
        b0=b0,
        flagged_samples=(0, n - 1),
    )


def demodulate(
    w: Waveform, b0: float, lo_offset_hz: float, block_size: int | None = None
) -> FieldSeries:
    return recover_field(analytic_signal(w, block_size=block_size), b0, lo_offset_hz)
