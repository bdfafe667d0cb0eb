"""Ferrimagnetic resonance of the YIG sphere and its two-port discriminator.

The discriminator is a YIG sphere inside two orthogonal coupling loops. Near
resonance it behaves as a Lorentzian band-pass filter whose S-parameters follow
from the unloaded linewidth ``kappa0`` and the coupling rates ``kappa1`` and
``kappa2`` (all angular FWHM values, rad/s). Outside roughly 50 loaded
linewidths of resonance the single-mode description stops being accurate.
"""

from __future__ import annotations

import logging
import math

import numpy as np

from ..errors import InvalidMeasurementError, ParameterError, PhysicalDomainError
from .const import GAMMA, MU_0, S_PARAMETER_VALIDITY_LINEWIDTHS
from .models import (
    CouplingFit,
    CouplingRates,
    ResonatorModel,
    SParameterPoint,
    SParameterSweep,
    SweepExtrema,
)

_LOGGER: logging.Logger = logging.getLogger(__package__)


def kittel_frequency(
    b_z: float, m_z: float, demag: tuple[float, float, float]
) -> float:
    """Uniform-precession frequency of a saturated ellipsoid, rad/s."""
    n_x, n_y, n_z = demag
    first = GAMMA * b_z + (n_y - n_z) * GAMMA * MU_0 * m_z
    second = GAMMA * b_z + (n_x - n_z) * GAMMA * MU_0 * m_z
    if not (math.isfinite(first) and math.isfinite(second)):
        raise PhysicalDomainError("Kittel formula evaluated with non-finite input")
    if first < 0 or second < 0:
        raise PhysicalDomainError(
            f"Kittel brackets ({first:.4g}, {second:.4g}) must be non-negative; "
            "the magnetization is not saturated along the field"
        )
    return math.sqrt(first * second)


def sphere_resonance(b: float | np.ndarray) -> float | np.ndarray:
    """Resonance of a sphere: demagnetization drops out and omega = gamma * b."""
    return GAMMA * b


def anisotropy_polynomial(theta: float) -> float:
    """Angular factor of the first-order cubic anisotropy shift in a {110} plane."""
    s2 = math.sin(theta) ** 2
    return 2 + 7.5 * s2 * s2 - 10 * s2


def anisotropy_resonance(b: float, theta: float, k1_over_mu0ms: float) -> float:
    return GAMMA * (b + k1_over_mu0ms * anisotropy_polynomial(theta))


def ztc_angle() -> float:
    """Angle from <100> where the first-order anisotropy shift vanishes."""
    return math.asin(math.sqrt((10 - 2 * math.sqrt(10)) / 15))


def s_parameters(
    model: ResonatorModel, omega_d: float, omega_y: float | None = None
) -> SParameterPoint:
    """Two-port S-parameters at drive frequency ``omega_d``.

    ``omega_y`` defaults to the sphere resonance at ``model.b0``. The output loop
    sits at right angles to the input loop, so transmission picks up a -pi/2
    phase in the forward direction and +pi/2 in reverse.
    """
    if omega_y is None:
        omega_y = model.omega_y
    detuning = omega_d - omega_y
    if abs(detuning) > S_PARAMETER_VALIDITY_LINEWIDTHS * model.kappa_l:
        _LOGGER.warning(
            "Detuning %.4g rad/s lies beyond %g loaded linewidths of resonance",
            detuning,
            S_PARAMETER_VALIDITY_LINEWIDTHS,
        )
    denominator = 1j * detuning + model.kappa_l / 2
    through = math.sqrt(model.kappa1 * model.kappa2) / denominator
    return SParameterPoint(
        omega_d=omega_d,
        s11=1 - model.kappa1 / denominator,
        s12=1j * through,
        s21=-1j * through,
        s22=1 - model.kappa2 / denominator,
    )


def s_parameter_sweep(
    model: ResonatorModel, freq_hz: np.ndarray, omega_y: float | None = None
) -> SParameterSweep:
    """Vectorised S11 and S21 over a frequency grid, as a VNA would record them."""
    if omega_y is None:
        omega_y = model.omega_y
    freq_hz = np.asarray(freq_hz, dtype=float)
    reach = np.max(np.abs(2 * np.pi * freq_hz - omega_y), initial=0.0)
    if reach > S_PARAMETER_VALIDITY_LINEWIDTHS * model.kappa_l:
        _LOGGER.warning(
            "Sweep reaches %.4g loaded linewidths from resonance; beyond %g the model "
            "is not valid",
            reach / model.kappa_l,
            S_PARAMETER_VALIDITY_LINEWIDTHS,
        )
    denominator = 1j * (2 * np.pi * freq_hz - omega_y) + model.kappa_l / 2
    return SParameterSweep(
        freq_hz=freq_hz,
        s11=1 - model.kappa1 / denominator,
        s21=-1j * math.sqrt(model.kappa1 * model.kappa2) / denominator,
    )


def extract_coupling_rates(
    s11_min_sq: float, s21_max_sq: float, kappa_l: float
) -> CouplingRates:
    """Solve for (kappa0, kappa1, kappa2) from the resonance extrema and width.

    Assumes an under-coupled input port (kappa1 < kappa_l / 2), where S11 on
    resonance is positive.
    """
    if not 0 <= s11_min_sq < 1:
        raise InvalidMeasurementError(f"|S11|^2 minimum {s11_min_sq} outside [0, 1)")
    if not 0 < s21_max_sq <= 1:
        raise InvalidMeasurementError(f"|S21|^2 maximum {s21_max_sq} outside (0, 1]")
    if not kappa_l > 0:
        raise InvalidMeasurementError(f"loaded linewidth {kappa_l} must be positive")

    root = math.sqrt(s11_min_sq)
    half = kappa_l / 2
    kappa1 = half * (1 - root)
    kappa2 = half * s21_max_sq / (1 - root)
    kappa0 = half * (1 + root - s21_max_sq / (1 - root))
    if kappa0 <= 0:
        raise InvalidMeasurementError(
            f"inconsistent measurement: recovered kappa0 = {kappa0:.4g} rad/s"
        )
    return CouplingRates(kappa0, kappa1, kappa2)


def _parabola_vertex(x: np.ndarray, y: np.ndarray, index: int) -> tuple[float, float]:
    if index == 0 or index == len(y) - 1:
        return float(x[index]), float(y[index])
    coeffs = np.polyfit(x[index - 1 : index + 2] - x[index], y[index - 1 : index + 2], 2)
    a, b, c = coeffs
    if a == 0:
        return float(x[index]), float(y[index])
    offset = -b / (2 * a)
    return float(x[index] + offset), float(c - b * b / (4 * a))


def _half_power_crossing(
    freq: np.ndarray, power: np.ndarray, level: float, peak: int, step: int
) -> float:
    index = peak
    while 0 <= index + step < len(power):
        nxt = index + step
        if power[nxt] <= level:
            f0, f1 = freq[index], freq[nxt]
            p0, p1 = power[index], power[nxt]
            return float(f0 + (level - p0) * (f1 - f0) / (p1 - p0))
        index = nxt
    raise InvalidMeasurementError("sweep does not span both half-power points")


def locate_extrema(sweep: SParameterSweep) -> SweepExtrema:
    """Interpolated |S11|^2 minimum, |S21|^2 maximum and 3-dB width of a sweep."""
    freq = sweep.freq_hz
    s21_sq = np.abs(sweep.s21) ** 2
    s11_sq = np.abs(sweep.s11) ** 2

    peak = int(np.argmax(s21_sq))
    f_peak, s21_max_sq = _parabola_vertex(freq, s21_sq, peak)
    _, s11_min_sq = _parabola_vertex(freq, s11_sq, int(np.argmin(s11_sq)))

    level = s21_max_sq / 2
    lower = _half_power_crossing(freq, s21_sq, level, peak, -1)
    upper = _half_power_crossing(freq, s21_sq, level, peak, +1)
    return SweepExtrema(
        s11_min_sq=max(s11_min_sq, 0.0),
        s21_max_sq=s21_max_sq,
        kappa_l=2 * math.pi * (upper - lower),
        omega_peak=2 * math.pi * f_peak,
    )


def loaded_q(model: ResonatorModel, omega_y: float | None = None) -> float:
    if not model.kappa_l > 0:
        raise ParameterError("loaded linewidth must be positive")
    return (model.omega_y if omega_y is None else omega_y) / model.kappa_l


def unloaded_q(model: ResonatorModel, omega_y: float | None = None) -> float:
    return (model.omega_y if omega_y is None else omega_y) / model.kappa0


def leeson_frequency(model: ResonatorModel) -> float:
    """Half of the loaded linewidth, in Hz."""
    if not model.kappa_l > 0:
        raise ParameterError("loaded linewidth must be positive")
    return model.kappa_l / (2 * 2 * math.pi)


def t2_from_linewidth(kappa0: float) -> float:
    """Transverse relaxation time of the uniform mode, 2 / kappa0."""
    if not kappa0 > 0:
        raise ParameterError("linewidth must be positive")
    return 2 / kappa0


def fit_sweep(sweep: SParameterSweep) -> CouplingFit:
    extrema = locate_extrema(sweep)
    rates = extract_coupling_rates(extrema.s11_min_sq, extrema.s21_max_sq, extrema.kappa_l)
    _LOGGER.debug("Sweep extrema %s give coupling rates %s", extrema, rates)
    two_pi = 2 * math.pi
    return CouplingFit(
        kappa0_hz=rates.kappa0 / two_pi,
        kappa1_hz=rates.kappa1 / two_pi,
        kappa2_hz=rates.kappa2 / two_pi,
        q_loaded=extrema.omega_peak / extrema.kappa_l,
        f_leeson_hz=extrema.kappa_l / (2 * two_pi),
    )
