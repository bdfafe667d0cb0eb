from __future__ import annotations

from typing import Any

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .const import (
    DEFAULT_BLOCK_SIZE,
    DEFAULT_DURATION_S,
    DEFAULT_IF_HZ,
    DEFAULT_NOISE_BAND_HZ,
    DEFAULT_SAMPLE_RATE_HZ,
)
from .physics.const import DEFAULT_FIT_F_MIN_HZ, DEFAULT_SEGMENT_S, DEFAULT_TUKEY_ALPHA
from .physics.models import LeesonFit, LeesonModel, ResonatorModel


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True)


class Tone(_Frozen):
    f_hz: float = Field(gt=0)
    b_rms_tesla: float = Field(ge=0)
    phase_rad: float = 0.0


class ChopSchedule(_Frozen):
    """Tone gating: on for ``duty * period_s`` at the start of every period."""

    period_s: float = Field(gt=0)
    duty: float = Field(default=0.5, gt=0, le=1)


class Sampling(_Frozen):
    sample_rate_hz: float = Field(default=DEFAULT_SAMPLE_RATE_HZ, gt=0)
    if_hz: float = Field(default=DEFAULT_IF_HZ, gt=0)
    duration_s: float = Field(default=DEFAULT_DURATION_S, gt=0)
    block_size: int = Field(default=DEFAULT_BLOCK_SIZE, gt=0)

    @model_validator(mode="after")
    def _if_below_nyquist(self) -> "Sampling":
        if 2 * self.if_hz >= self.sample_rate_hz:
            raise ValueError(
                f"intermediate frequency {self.if_hz:g} Hz is not below half the "
                f"{self.sample_rate_hz:g} Hz sample rate"
            )
        return self

    @property
    def n_samples(self) -> int:
        return int(round(self.duration_s * self.sample_rate_hz))


class Analysis(_Frozen):
    segment_s: float = Field(default=DEFAULT_SEGMENT_S, gt=0)
    tukey_alpha: float = Field(default=DEFAULT_TUKEY_ALPHA, ge=0, le=1)
    noise_band_hz: tuple[float, float] = DEFAULT_NOISE_BAND_HZ
    fit_f_min_hz: float = Field(default=DEFAULT_FIT_F_MIN_HZ, gt=0)

    @model_validator(mode="after")
    def _ordered_band(self) -> "Analysis":
        low, high = self.noise_band_hz
        if not 0 < low < high:
            raise ValueError(f"noise band {low:g}-{high:g} Hz is empty")
        return self


class Scenario(_Frozen):
    resonator: ResonatorModel
    leeson: LeesonModel | None = None
    tones: tuple[Tone, ...] = ()
    chop: ChopSchedule | None = None
    sampling: Sampling = Sampling()
    analysis: Analysis = Analysis()
    seed: int = 0

    @model_validator(mode="after")
    def _two_segments(self) -> "Scenario":
        if self.sampling.duration_s < 2 * self.analysis.segment_s:
            raise ValueError(
                f"duration {self.sampling.duration_s:g} s is shorter than two "
                f"{self.analysis.segment_s:g} s segments"
            )
        return self


class ToneReading(_Frozen):
    f_hz: float
    applied_rms_tesla: float
    asd_t_per_rthz: float
    reading_rms_tesla: float
    predicted_floor_t_per_rthz: float | None


class RunReport(_Frozen):
    config: dict[str, Any]
    n_samples: int
    segments: int
    resolution_hz: float
    noise_band_hz: tuple[float, float]
    noise_floor_t_per_rthz: float
    predicted_floor_t_per_rthz: float | None
    tones: list[ToneReading]
    chop_trace_tesla: list[float] | None
    leeson_fit: LeesonFit | None
    leeson_fit_error: str | None = None


class SidebandPoint(_Frozen):
    f_m_hz: float
    modulation_index: float
    predicted: float
    measured_lower: float
    measured_upper: float

    @property
    def measured(self) -> float:
        return (self.measured_lower + self.measured_upper) / 2

    @property
    def relative_error(self) -> float:
        return self.measured / self.predicted - 1


class PhaseNoiseRow(_Frozen):
    offset_hz: float
    l_dbchz: float
    sensitivity_t_per_rthz: float
    plateau_t_per_rthz: float
