"""End-to-end scenario runs and the tables behind the phase-noise and sideband plots."""

from __future__ import annotations

from dataclasses import dataclass
import logging
import math
from typing import Any, Callable, Sequence, TypeVar

import numpy as np

from .config import scenario_to_config
from .const import (
    SWEEP_B_RMS_TESLA,
    SWEEP_CARRIER_HZ,
    SWEEP_DURATION_S,
    SWEEP_F_M_HZ,
    SWEEP_SAMPLE_RATE_HZ,
    TABLE_OFFSET_RANGE_HZ,
    TABLE_OFFSETS_PER_DECADE,
    Stage,
)
from .errors import FitError, StageError
from .models import PhaseNoiseRow, RunReport, Scenario, SidebandPoint, ToneReading
from .physics.const import B0_TESLA
from .physics.demod import demodulate
from .physics.encode import (
    carrier_offset_for,
    fractional_cycles,
    measure_sidebands,
    modulation_index,
    predict_sideband,
    synthesize_waveform,
)
from .physics.leeson import (
    estimate_phase_noise,
    fit_leeson,
    leeson_l_dbchz,
    synthesize_phase_noise,
)
from .physics.models import AsdSpectrum, FieldSeries, LeesonFit, LeesonModel, Waveform
from .physics.spectral import (
    average_spectra,
    bin_value,
    chop_detect,
    noise_floor,
    segment_asds,
    sensitivity_leeson_closed_form,
)
from .result import Result

_LOGGER: logging.Logger = logging.getLogger(__package__)

T = TypeVar("T")

# Welch resolution used when re-fitting the synthesized noise, as a fraction of
# the lowest fitted offset.
_FIT_RESOLUTION_FRACTION = 1 / 30


@dataclass
class ScenarioOutcome:
    field: FieldSeries
    asd: AsdSpectrum
    segment_spectra: list[AsdSpectrum]
    chop_trace: np.ndarray | None
    report: RunReport


def build_field(scenario: Scenario) -> FieldSeries:
    """Sum of the scenario tones, gated by the chop schedule if one is set."""
    sampling = scenario.sampling
    n = sampling.n_samples
    samples = np.zeros(n)
    for tone in scenario.tones:
        cycles = fractional_cycles(tone.f_hz, sampling.sample_rate_hz, n)
        samples += math.sqrt(2) * tone.b_rms_tesla * np.cos(2 * np.pi * cycles + tone.phase_rad)
    if scenario.chop is not None:
        times = np.arange(n) / sampling.sample_rate_hz
        on = np.mod(times, scenario.chop.period_s) < scenario.chop.duty * scenario.chop.period_s
        samples *= on
    return FieldSeries(
        sample_rate=sampling.sample_rate_hz, samples=samples, b0=scenario.resonator.b0
    )


class ScenarioRunner:
    """Runs encode, demod, spectral and fit stages for one scenario."""

    def __init__(self, scenario: Scenario) -> None:
        self.scenario = scenario
        self.carrier_offset = carrier_offset_for(scenario.resonator.b0, scenario.sampling.if_hz)

    @staticmethod
    def _stage(stage: Stage, f: Callable[..., T], *args: Any) -> T:
        _LOGGER.info("Stage %s", stage.value)
        result = Result.capture(f, *args)
        if result.is_error():
            raise StageError(stage.value, result.value) from result.value
        return result.value

    def run(self) -> ScenarioOutcome:
        s = self.scenario
        _LOGGER.info(
            "Running scenario: %d samples at %.4g Hz, carrier at %.4g Hz, seed %d",
            s.sampling.n_samples,
            s.sampling.sample_rate_hz,
            s.sampling.if_hz,
            s.seed,
        )
        waveform, noise = self._stage(Stage.ENCODE, self._encode)
        # The noise record is only needed by the fit; free it before the Hilbert transform.
        fit, fit_error = self._fit(noise)
        del noise
        recovered = self._stage(
            Stage.DEMOD,
            demodulate,
            waveform,
            s.resonator.b0,
            -self.carrier_offset,
            s.sampling.block_size,
        )
        del waveform
        spectra = self._stage(
            Stage.SPECTRAL,
            segment_asds,
            recovered,
            s.analysis.segment_s,
            s.analysis.tukey_alpha,
        )
        asd, floor, readings, trace = self._stage(Stage.SPECTRAL, self._analyse, spectra)

        predicted_floor = None
        if s.leeson is not None:
            low, high = s.analysis.noise_band_hz
            predicted_floor = sensitivity_leeson_closed_form(s.leeson).curve(math.sqrt(low * high))
        report = RunReport(
            config=scenario_to_config(s),
            n_samples=recovered.n_samples,
            segments=asd.segments,
            resolution_hz=asd.resolution_hz,
            noise_band_hz=s.analysis.noise_band_hz,
            noise_floor_t_per_rthz=floor,
            predicted_floor_t_per_rthz=predicted_floor,
            tones=readings,
            chop_trace_tesla=None if trace is None else trace.tolist(),
            leeson_fit=fit,
            leeson_fit_error=fit_error,
        )
        _LOGGER.info("Scenario complete: noise floor %.4g T/rtHz", floor)
        return ScenarioOutcome(
            field=recovered,
            asd=asd,
            segment_spectra=spectra,
            chop_trace=trace,
            report=report,
        )

    def _encode(self) -> tuple[Waveform, np.ndarray | None]:
        s = self.scenario
        field = build_field(s)
        noise = None
        if s.leeson is not None:
            noise = synthesize_phase_noise(
                s.leeson, s.sampling.sample_rate_hz, field.n_samples, s.seed
            )
        waveform = synthesize_waveform(
            field, carrier_offset=self.carrier_offset, phase_noise=noise
        )
        return waveform, noise

    def _analyse(
        self, spectra: list[AsdSpectrum]
    ) -> tuple[AsdSpectrum, float, list[ToneReading], np.ndarray | None]:
        s = self.scenario
        asd = average_spectra(spectra)
        floor = noise_floor(asd, s.analysis.noise_band_hz, exclude=[t.f_hz for t in s.tones])
        curve = None if s.leeson is None else sensitivity_leeson_closed_form(s.leeson).curve
        readings = []
        for tone in s.tones:
            value = bin_value(asd, tone.f_hz)
            readings.append(
                ToneReading(
                    f_hz=tone.f_hz,
                    applied_rms_tesla=tone.b_rms_tesla,
                    asd_t_per_rthz=value,
                    reading_rms_tesla=value * math.sqrt(asd.resolution_hz),
                    predicted_floor_t_per_rthz=None if curve is None else curve(tone.f_hz),
                )
            )
        trace = None
        if s.chop is not None and s.tones:
            trace = chop_detect(spectra, s.tones[0].f_hz) * math.sqrt(asd.resolution_hz)
        return asd, floor, readings, trace

    def _fit(self, noise: np.ndarray | None) -> tuple[LeesonFit | None, str | None]:
        s = self.scenario
        if noise is None or s.leeson is None:
            return None, None
        f_min = s.analysis.fit_f_min_hz
        fs = s.sampling.sample_rate_hz
        result = Result.capture(
            estimate_phase_noise,
            noise,
            fs,
            min(len(noise) // 4, int(round(fs / (f_min * _FIT_RESOLUTION_FRACTION)))),
            20,
            f_min,
            fs / 4,
        ).map(
            lambda spectrum: fit_leeson(
                spectrum, s.leeson.p_sustain, s.leeson.temperature, f_min=f_min
            )
        )
        if not result.is_error():
            return result.value, None
        if isinstance(result.value, FitError):
            _LOGGER.warning("Leeson fit of the synthesized noise failed: %s", result.value)
            return None, str(result.value)
        raise StageError(Stage.FIT.value, result.value) from result.value


def run_scenario(scenario: Scenario) -> ScenarioOutcome:
    return ScenarioRunner(scenario).run()


def sideband_sweep(
    b_rms: float = SWEEP_B_RMS_TESLA,
    f_m_values: Sequence[float] = SWEEP_F_M_HZ,
    carrier_hz: float = SWEEP_CARRIER_HZ,
    sample_rate: float = SWEEP_SAMPLE_RATE_HZ,
    duration_s: float = SWEEP_DURATION_S,
    b0: float = B0_TESLA,
) -> list[SidebandPoint]:
    """First-sideband amplitudes of noiseless FM waveforms against the narrowband estimate.

    Every ``f_m`` and the carrier must fall on a bin of the ``duration_s`` record.
    """
    n = int(round(duration_s * sample_rate))
    offset = carrier_offset_for(b0, carrier_hz)
    points = []
    for f_m in f_m_values:
        cycles = fractional_cycles(f_m, sample_rate, n)
        field = FieldSeries(
            sample_rate=sample_rate,
            samples=math.sqrt(2) * b_rms * np.cos(2 * np.pi * cycles),
            b0=b0,
        )
        reading = measure_sidebands(synthesize_waveform(field, carrier_offset=offset), f_m)
        omega_m = 2 * math.pi * f_m
        points.append(
            SidebandPoint(
                f_m_hz=f_m,
                modulation_index=modulation_index(b_rms, omega_m),
                predicted=predict_sideband(b_rms, omega_m),
                measured_lower=abs(reading.lower) / abs(reading.carrier),
                measured_upper=abs(reading.upper) / abs(reading.carrier),
            )
        )
        _LOGGER.debug("Sideband at %.4g Hz: %s", f_m, points[-1])
    return points


def table_offsets(
    low: float = TABLE_OFFSET_RANGE_HZ[0],
    high: float = TABLE_OFFSET_RANGE_HZ[1],
    per_decade: int = TABLE_OFFSETS_PER_DECADE,
) -> np.ndarray:
    count = int(round(per_decade * math.log10(high / low))) + 1
    return np.logspace(math.log10(low), math.log10(high), count)


def phase_noise_table(
    model: LeesonModel, offsets: np.ndarray | None = None
) -> list[PhaseNoiseRow]:
    """L(f_m) and the equivalent field sensitivity over ``offsets``."""
    offsets = table_offsets() if offsets is None else np.asarray(offsets, dtype=float)
    sensitivity = sensitivity_leeson_closed_form(model)
    l_dbchz = leeson_l_dbchz(model, offsets)
    eta = sensitivity.curve(offsets)
    return [
        PhaseNoiseRow(
            offset_hz=float(f),
            l_dbchz=float(l),
            sensitivity_t_per_rthz=float(e),
            plateau_t_per_rthz=sensitivity.plateau,
        )
        for f, l, e in zip(offsets, np.atleast_1d(l_dbchz), np.atleast_1d(eta))
    ]
