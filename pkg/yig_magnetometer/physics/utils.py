"""Readers and writers for the simulator's file formats.

Text tables are comma-separated with ``#`` comments. Sample records are raw
little-endian float64 with a JSON sidecar next to them (same stem, ``.json``).
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence, Type, TypeVar

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from ..errors import ParseError
from .const import ASD_CONVENTION, B0_TESLA
from .models import AsdSpectrum, FieldSeries, PhaseNoiseSpectrum, SParameterSweep, Waveform

T = TypeVar("T", bound=BaseModel)

_LE_FLOAT64 = np.dtype("<f8")


class WaveformSidecar(BaseModel):
    sample_rate_hz: float = Field(gt=0)
    carrier_hz: float = Field(gt=0)
    n_samples: int = Field(ge=0)
    bandwidth_hz: float = Field(default=0.0, ge=0)


class FieldSidecar(BaseModel):
    sample_rate_hz: float = Field(gt=0)
    b0_tesla: float = Field(gt=0)
    n_samples: int = Field(ge=0)
    flagged_samples: list[int] = []


class AsdMetadata(BaseModel):
    window: str
    alpha: float
    segments: int
    convention: str = ASD_CONVENTION
    resolution_hz: float
    psd: bool = False


def from_json(path: Path, model: Type[T], strict: bool = True) -> T:
    try:
        return model.model_validate_json(Path(path).read_text(), strict=strict)
    except ValidationError as exc:
        raise ParseError(str(path), 1, str(exc)) from exc


def write_json(path: Path, model: BaseModel) -> None:
    data = model.model_dump(mode="json")
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def sidecar_path(path: Path) -> Path:
    return Path(path).with_suffix(".json")


def read_table(path: Path, n_columns: int) -> np.ndarray:
    """Rows of ``n_columns`` floats; raises ParseError naming the bad line."""
    rows: list[list[float]] = []
    with open(path, encoding="utf-8") as handle:
        for number, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            fields = [part.strip() for part in line.split(",")]
            if len(fields) != n_columns:
                raise ParseError(
                    str(path), number, f"expected {n_columns} columns, found {len(fields)}"
                )
            try:
                rows.append([float(field) for field in fields])
            except ValueError as exc:
                raise ParseError(str(path), number, str(exc)) from exc
    if not rows:
        raise ParseError(str(path), 0, "file holds no data rows")
    return np.array(rows, dtype=float)


def write_table(path: Path, columns: Sequence[np.ndarray], header: str) -> None:
    data = np.column_stack(columns)
    np.savetxt(path, data, delimiter=", ", header=header, fmt="%.12g")


def read_sweep(path: Path) -> SParameterSweep:
    table = read_table(path, 5)
    try:
        return SParameterSweep(
            freq_hz=table[:, 0],
            s11=table[:, 1] + 1j * table[:, 2],
            s21=table[:, 3] + 1j * table[:, 4],
        )
    except ValidationError as exc:
        raise ParseError(str(path), 0, str(exc)) from exc


def write_sweep(path: Path, sweep: SParameterSweep) -> None:
    write_table(
        path,
        [sweep.freq_hz, sweep.s11.real, sweep.s11.imag, sweep.s21.real, sweep.s21.imag],
        "freq_hz, re(S11), im(S11), re(S21), im(S21)",
    )


def read_phase_noise(path: Path) -> PhaseNoiseSpectrum:
    table = read_table(path, 2)
    try:
        return PhaseNoiseSpectrum(offsets=table[:, 0], l_dbchz=table[:, 1])
    except ValidationError as exc:
        raise ParseError(str(path), 0, str(exc)) from exc


def write_phase_noise(path: Path, spectrum: PhaseNoiseSpectrum) -> None:
    write_table(path, [spectrum.offsets, spectrum.l_dbchz], "offset_hz, l_dbchz")


def _read_samples(path: Path, n_samples: int) -> np.ndarray:
    samples = np.fromfile(path, dtype=_LE_FLOAT64)
    if len(samples) != n_samples:
        raise ParseError(
            str(path), 0, f"sidecar declares {n_samples} samples, file holds {len(samples)}"
        )
    return samples.astype(np.float64)


def write_waveform(path: Path, waveform: Waveform) -> None:
    waveform.samples.astype(_LE_FLOAT64).tofile(path)
    write_json(
        sidecar_path(path),
        WaveformSidecar(
            sample_rate_hz=waveform.sample_rate,
            carrier_hz=waveform.carrier_hz,
            n_samples=waveform.n_samples,
            bandwidth_hz=waveform.bandwidth_hz,
        ),
    )


def read_waveform(path: Path) -> Waveform:
    sidecar = from_json(sidecar_path(path), WaveformSidecar, strict=False)
    return Waveform(
        sample_rate=sidecar.sample_rate_hz,
        samples=_read_samples(path, sidecar.n_samples),
        carrier_hz=sidecar.carrier_hz,
        bandwidth_hz=sidecar.bandwidth_hz,
    )


def read_field(path: Path, b0: float = B0_TESLA) -> FieldSeries:
    """Field from a ``time_s, b_tesla`` table or a binary record with sidecar."""
    path = Path(path)
    if path.suffix == ".bin":
        sidecar = from_json(sidecar_path(path), FieldSidecar, strict=False)
        return FieldSeries(
            sample_rate=sidecar.sample_rate_hz,
            samples=_read_samples(path, sidecar.n_samples),
            b0=sidecar.b0_tesla,
            flagged_samples=tuple(sidecar.flagged_samples),
        )
    table = read_table(path, 2)
    if len(table) < 2:
        raise ParseError(str(path), 0, "a field needs at least two samples")
    steps = np.diff(table[:, 0])
    step = float(np.mean(steps))
    if step <= 0 or np.max(np.abs(steps - step)) > 1e-6 * step:
        raise ParseError(str(path), 0, "time column is not uniformly sampled")
    return FieldSeries(sample_rate=1 / step, samples=table[:, 1], b0=b0)


def write_field(path: Path, field: FieldSeries) -> None:
    path = Path(path)
    if path.suffix == ".bin":
        field.samples.astype(_LE_FLOAT64).tofile(path)
        write_json(
            sidecar_path(path),
            FieldSidecar(
                sample_rate_hz=field.sample_rate,
                b0_tesla=field.b0,
                n_samples=field.n_samples,
                flagged_samples=list(field.flagged_samples),
            ),
        )
        return
    write_table(path, [field.times, field.samples], "time_s, b_tesla")


def write_asd(path: Path, asd: AsdSpectrum) -> None:
    unit = "psd_t2_per_hz" if asd.psd else "asd_t_per_rthz"
    write_table(path, [asd.freqs, asd.asd], f"freq_hz, {unit}")
    write_json(
        sidecar_path(path),
        AsdMetadata(
            window=asd.window,
            alpha=asd.tukey_alpha,
            segments=asd.segments,
            convention=asd.convention,
            resolution_hz=asd.resolution_hz,
            psd=asd.psd,
        ),
    )
