"""Domain types shared by the physics modules.

All models are frozen. Array fields are stored as read-only numpy views so an
instance can be handed between threads without copying.
"""

from __future__ import annotations

import logging
import math
from typing import Annotated, Any, NamedTuple

import numpy as np
from pydantic import (
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    PlainSerializer,
    field_validator,
    model_validator,
)

from .const import (
    ASD_CONVENTION,
    B0_TESLA,
    GAMMA,
    K1_OVER_MU0MS_TESLA,
    K_B,
    LINEAR_REGIME_MAX_RATIO,
    MS_A_PER_M,
    P_SUSTAIN_W,
    Q0,
    SPHERE_DEMAG,
    SPHERE_DIAMETER_M,
    SPIN_DENSITY_PER_M3,
    T2_STAR_S,
    TEMPERATURE_K,
)

_LOGGER: logging.Logger = logging.getLogger(__package__)


def _read_only(dtype: type) -> Any:
    def convert(value: Any) -> np.ndarray:
        array = np.asarray(value, dtype=dtype)
        if array.ndim != 1:
            raise ValueError(f"expected a one-dimensional array, got shape {array.shape}")
        view = array.view()
        view.setflags(write=False)
        return view

    return convert


FloatArray = Annotated[
    np.ndarray,
    BeforeValidator(_read_only(np.float64)),
    PlainSerializer(lambda a: a.tolist(), return_type=list),
]
ComplexArray = Annotated[
    np.ndarray,
    BeforeValidator(_read_only(np.complex128)),
    PlainSerializer(lambda a: [[z.real, z.imag] for z in a.tolist()], return_type=list),
]


class FrozenModel(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)


# ── fmr ─────────────────────────────────────────────────────────────────────────


class ResonatorModel(FrozenModel):
    kappa0: float = Field(gt=0)
    kappa1: float = Field(gt=0)
    kappa2: float = Field(gt=0)
    b0: float = Field(default=B0_TESLA, gt=0)
    ms: float = Field(default=MS_A_PER_M, gt=0)
    demag: tuple[float, float, float] = SPHERE_DEMAG
    k1_over_mu0ms: float = K1_OVER_MU0MS_TESLA
    theta: float = Field(default=0.0, ge=0, le=math.pi / 2)

    @field_validator("demag")
    @classmethod
    def _demag_factors(cls, value: tuple[float, float, float]) -> tuple[float, float, float]:
        if any(not 0 <= n <= 1 for n in value):
            raise ValueError("demagnetization factors must lie in [0, 1]")
        if not math.isclose(sum(value), 1.0, rel_tol=1e-9):
            raise ValueError(f"demagnetization factors sum to {sum(value)}, not 1")
        return value

    @property
    def kappa_l(self) -> float:
        return self.kappa0 + self.kappa1 + self.kappa2

    @property
    def omega_y(self) -> float:
        """Sphere resonance at the bias field."""
        return GAMMA * self.b0


class SParameterPoint(FrozenModel):
    omega_d: float
    s11: complex
    s12: complex
    s21: complex
    s22: complex

    @model_validator(mode="after")
    def _passive_and_reciprocal(self) -> "SParameterPoint":
        if not math.isclose(abs(self.s21), abs(self.s12), rel_tol=1e-9, abs_tol=1e-15):
            raise ValueError("|S21| and |S12| differ")
        if abs(self.s21) > 1 + 1e-12 or abs(self.s11) > 1 + 1e-12:
            raise ValueError("passive two-port cannot have |S| > 1")
        return self


class SParameterSweep(FrozenModel):
    freq_hz: FloatArray
    s11: ComplexArray
    s21: ComplexArray

    @model_validator(mode="after")
    def _shape(self) -> "SParameterSweep":
        if not len(self.freq_hz) == len(self.s11) == len(self.s21):
            raise ValueError("sweep columns differ in length")
        if len(self.freq_hz) < 5:
            raise ValueError("a sweep needs at least 5 points")
        if np.any(np.diff(self.freq_hz) <= 0):
            raise ValueError("sweep frequencies must be strictly increasing")
        return self


class CouplingRates(NamedTuple):
    kappa0: float
    kappa1: float
    kappa2: float


class SweepExtrema(NamedTuple):
    s11_min_sq: float
    s21_max_sq: float
    kappa_l: float
    omega_peak: float


class CouplingFit(FrozenModel):
    kappa0_hz: float
    kappa1_hz: float
    kappa2_hz: float
    q_loaded: float
    f_leeson_hz: float


# ── leeson ──────────────────────────────────────────────────────────────────────


class LeesonModel(FrozenModel):
    f_leeson: float = Field(gt=0)
    f_corner: float = Field(gt=0)
    noise_factor: float = Field(gt=0)
    p_sustain: float = Field(default=P_SUSTAIN_W, gt=0)
    temperature: float = Field(default=TEMPERATURE_K, gt=0)

    @property
    def white_floor(self) -> float:
        """F k_B T / P_s, the single-sided white phase PSD in rad^2/Hz."""
        return self.noise_factor * K_B * self.temperature / self.p_sustain


class PhaseNoiseSpectrum(FrozenModel):
    offsets: FloatArray
    l_dbchz: FloatArray

    @model_validator(mode="after")
    def _monotone_offsets(self) -> "PhaseNoiseSpectrum":
        if len(self.offsets) != len(self.l_dbchz):
            raise ValueError("offsets and l_dbchz differ in length")
        if not (np.all(np.isfinite(self.offsets)) and np.all(np.isfinite(self.l_dbchz))):
            raise ValueError("phase-noise spectrum holds non-finite values")
        if len(self.offsets) and self.offsets[0] <= 0:
            raise ValueError("offsets must be positive")
        if np.any(np.diff(self.offsets) <= 0):
            raise ValueError("offsets must be strictly increasing")
        return self


class LeesonFit(FrozenModel):
    f_leeson_hz: float
    f_corner_hz: float
    noise_factor: float
    p_sustain_w: float
    temperature_k: float
    residual_rms_db: float

    def to_model(self) -> LeesonModel:
        return LeesonModel(
            f_leeson=self.f_leeson_hz,
            f_corner=self.f_corner_hz,
            noise_factor=self.noise_factor,
            p_sustain=self.p_sustain_w,
            temperature=self.temperature_k,
        )


# ── encode / demod ──────────────────────────────────────────────────────────────


class FieldSeries(FrozenModel):
    sample_rate: float = Field(gt=0)
    samples: FloatArray
    b0: float = Field(default=B0_TESLA, gt=0)
    flagged_samples: tuple[int, ...] = ()

    @model_validator(mode="after")
    def _linear_regime(self) -> "FieldSeries":
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("field samples must be finite")
        if len(self.samples):
            ratio = float(np.max(np.abs(self.samples))) / self.b0
            if ratio > LINEAR_REGIME_MAX_RATIO:
                _LOGGER.warning(
                    "Field excursion is %.3g of the bias field; the linear projection "
                    "regime assumes less than %.0e",
                    ratio,
                    LINEAR_REGIME_MAX_RATIO,
                )
        return self

    @property
    def n_samples(self) -> int:
        return len(self.samples)

    @property
    def duration(self) -> float:
        return self.n_samples / self.sample_rate

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_samples) / self.sample_rate


class Waveform(FrozenModel):
    sample_rate: float = Field(gt=0)
    samples: FloatArray
    carrier_hz: float = Field(gt=0)
    # Half-width of the occupied band around the carrier.
    bandwidth_hz: float = Field(default=0.0, ge=0)

    @model_validator(mode="after")
    def _nyquist(self) -> "Waveform":
        if self.sample_rate <= 2 * (self.carrier_hz + self.bandwidth_hz):
            raise ValueError(
                f"sample rate {self.sample_rate:g} Hz cannot represent a carrier at "
                f"{self.carrier_hz:g} Hz with {self.bandwidth_hz:g} Hz of modulation"
            )
        return self

    @property
    def n_samples(self) -> int:
        return len(self.samples)


class AnalyticSignal(FrozenModel):
    sample_rate: float = Field(gt=0)
    samples: ComplexArray
    if_hz: float = Field(gt=0)

    @field_validator("samples")
    @classmethod
    def _nonvanishing(cls, value: np.ndarray) -> np.ndarray:
        if np.any(np.abs(value) == 0):
            raise ValueError("analytic signal vanishes; phase is undefined")
        return value


class SidebandSpectrum(NamedTuple):
    orders: np.ndarray
    amplitudes: np.ndarray


class SidebandReading(NamedTuple):
    carrier: complex
    lower: complex
    upper: complex

    @property
    def ratio(self) -> float:
        """Mean sideband-to-carrier amplitude ratio."""
        return (abs(self.lower) + abs(self.upper)) / (2 * abs(self.carrier))


# ── spectral ────────────────────────────────────────────────────────────────────


class AsdSpectrum(FrozenModel):
    freqs: FloatArray
    asd: FloatArray
    convention: str = ASD_CONVENTION
    psd: bool = False
    window: str = "tukey"
    tukey_alpha: float = Field(default=0.0, ge=0, le=1)
    segments: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _single_sided(self) -> "AsdSpectrum":
        if len(self.freqs) != len(self.asd):
            raise ValueError("freqs and asd differ in length")
        if len(self.freqs) and self.freqs[0] <= 0:
            raise ValueError("spectrum must start at bin 1; DC is excluded")
        if np.any(self.asd < 0):
            raise ValueError("spectral density cannot be negative")
        return self

    @property
    def resolution_hz(self) -> float:
        return float(self.freqs[0])

    def value_at(self, index: int) -> float:
        return float(self.asd[index])


# ── limits ──────────────────────────────────────────────────────────────────────


class SphereSpec(FrozenModel):
    diameter: float = Field(default=SPHERE_DIAMETER_M, gt=0)
    spin_density: float = Field(default=SPIN_DENSITY_PER_M3, gt=0)
    t2_star: float = Field(default=T2_STAR_S, gt=0)
    q0: float = Field(default=Q0, gt=0)
    ms: float = Field(default=MS_A_PER_M, gt=0)
    temperature: float = Field(default=TEMPERATURE_K, gt=0)

    @property
    def volume(self) -> float:
        return math.pi * self.diameter**3 / 6

    @property
    def spin_count(self) -> float:
        return self.spin_density * self.volume


class FiniteBiasError(NamedTuple):
    measured_projection: float
    error: float
    exact_deviation: float


class LimitsBudget(FrozenModel):
    sphere_volume_m3: float
    spin_count: float
    spin_projection_limit_t_rts: float
    thermal_limit_t_rts: float
    thermal_to_spin_projection_ratio: float
    tip_angle_rad: float
    finite_bias_error_tesla: float
    gradient_tolerance_t_per_m: float
