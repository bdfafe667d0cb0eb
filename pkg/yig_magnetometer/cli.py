"""Command-line interface: scenario runs, fits of imported data and plot tables."""

from __future__ import annotations

import argparse
import json
import logging
import os
from pathlib import Path
from typing import Any, Callable, Sequence

from pydantic import BaseModel, ValidationError

from .config import dbm_to_watts, load_scenario
from .const import (
    ASD_FILE,
    CHOP_FILE,
    DEFAULT_BLOCK_SIZE,
    EXIT_CONFIG_ERROR,
    EXIT_NUMERICAL_ERROR,
    EXIT_OK,
    FIELD_FILE,
    REPORT_FILE,
    STARTUP_MESSAGE,
    SWEEP_B_RMS_TESLA,
    VERSION,
    OutputFormat,
)
from .errors import ConfigError, NumericalError, StageError
from .physics.const import (
    B0_TESLA,
    B_RF_TESLA,
    DEFAULT_CARRIER_HZ,
    DEFAULT_FIT_F_MIN_HZ,
    DEFAULT_SEGMENT_S,
    DEFAULT_TUKEY_ALPHA,
    F_CORNER_HZ,
    F_LEESON_HZ,
    GAMMA_HZ_PER_TESLA,
    NOISE_FACTOR,
    P_SUSTAIN_W,
    SPHERE_DIAMETER_M,
    SPIN_DENSITY_PER_M3,
    T2_S,
    TEMPERATURE_K,
)
from .physics.demod import demodulate
from .physics.encode import carrier_offset_for, synthesize_waveform
from .physics.fmr import fit_sweep
from .physics.leeson import fit_leeson
from .physics.limits import budget
from .physics.models import LeesonModel, SphereSpec
from .physics.spectral import field_asd
from .physics.utils import (
    read_field,
    read_phase_noise,
    read_sweep,
    read_waveform,
    write_asd,
    write_field,
    write_json,
    write_table,
    write_waveform,
)
from .scenario import phase_noise_table, run_scenario, sideband_sweep

_LOGGER: logging.Logger = logging.getLogger(__package__)

SWEEP_TABLE = "sideband_sweep.txt"
PHASE_NOISE_TABLE = "phase_noise.txt"


def _dump(payload: BaseModel | Sequence[BaseModel]) -> Any:
    if isinstance(payload, BaseModel):
        return payload.model_dump(mode="json")
    return [row.model_dump(mode="json") for row in payload]


def _emit(args: argparse.Namespace, payload: BaseModel | Sequence[BaseModel]) -> None:
    data = _dump(payload)
    if OutputFormat(args.format) is OutputFormat.JSON:
        print(json.dumps(data, indent=2, sort_keys=True))
        return
    rows = data if isinstance(data, list) else [data]
    for row in rows:
        print(
            "  ".join(
                f"{key}={value:.6g}" if isinstance(value, float) else f"{key}={value}"
                for key, value in row.items()
                if not isinstance(value, (dict, list))
            )
        )


def _measured_leeson(f_leeson: float = F_LEESON_HZ) -> LeesonModel:
    return LeesonModel(f_leeson=f_leeson, f_corner=F_CORNER_HZ, noise_factor=NOISE_FACTOR)


def _out_dir(args: argparse.Namespace) -> Path:
    path = Path(args.out_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _run(args: argparse.Namespace) -> int:
    scenario = load_scenario(Path(args.config), os.environ)
    if args.seed is not None:
        scenario = scenario.model_copy(update={"seed": args.seed})
    if args.block_size is not None:
        sampling = scenario.sampling.model_copy(update={"block_size": args.block_size})
        scenario = scenario.model_copy(update={"sampling": sampling})
    outcome = run_scenario(scenario)
    out_dir = _out_dir(args)
    write_json(out_dir / REPORT_FILE, outcome.report)
    write_asd(out_dir / ASD_FILE, outcome.asd)
    write_field(out_dir / FIELD_FILE, outcome.field)
    if outcome.chop_trace is not None:
        segments = range(len(outcome.chop_trace))
        write_table(
            out_dir / CHOP_FILE,
            [[float(i) * scenario.analysis.segment_s for i in segments], outcome.chop_trace],
            "segment_start_s, tone_rms_tesla",
        )
    _LOGGER.info("Wrote run outputs to %s", out_dir)
    _emit(args, outcome.report)
    return EXIT_OK


def _sustain_power(args: argparse.Namespace) -> float:
    if args.p_sustain_dbm is not None and args.p_sustain_w is not None:
        raise ConfigError("give the sustaining power in dBm or in watts, not both")
    if args.p_sustain_dbm is not None:
        return dbm_to_watts(args.p_sustain_dbm)
    return P_SUSTAIN_W if args.p_sustain_w is None else args.p_sustain_w


def _fit_leeson(args: argparse.Namespace) -> int:
    spectrum = read_phase_noise(Path(args.spectrum))
    fit = fit_leeson(spectrum, _sustain_power(args), args.temperature_k, f_min=args.f_min_hz)
    _emit(args, fit)
    return EXIT_OK


def _extract_kappas(args: argparse.Namespace) -> int:
    _emit(args, fit_sweep(read_sweep(Path(args.sweep))))
    return EXIT_OK


def _limits(args: argparse.Namespace) -> int:
    spec = SphereSpec(diameter=args.diameter_m, spin_density=args.spin_density_per_m3)
    report = budget(
        spec,
        b_rf=args.b_rf_tesla,
        t1=args.t1_s,
        t2=args.t2_s,
        b_perp=args.b_perp_tesla,
        b_par=args.b_par_tesla,
        b0=args.b0_tesla,
    )
    _emit(args, report)
    return EXIT_OK


def _encode(args: argparse.Namespace) -> int:
    field = read_field(Path(args.field), b0=args.b0_tesla)
    leeson = _measured_leeson() if args.leeson else None
    waveform = synthesize_waveform(
        field,
        leeson=leeson,
        carrier_offset=carrier_offset_for(field.b0, args.carrier_hz),
        seed=args.seed or 0,
    )
    write_waveform(Path(args.output), waveform)
    _LOGGER.info("Wrote %d samples at %.4g Hz carrier", waveform.n_samples, waveform.carrier_hz)
    return EXIT_OK


def _demod(args: argparse.Namespace) -> int:
    waveform = read_waveform(Path(args.waveform))
    lo_offset = args.lo_offset_hz
    if lo_offset is None:
        lo_offset = GAMMA_HZ_PER_TESLA * args.b0_tesla - waveform.carrier_hz
    field = demodulate(waveform, args.b0_tesla, lo_offset, block_size=args.block_size)
    write_field(Path(args.output), field)
    return EXIT_OK


def _asd(args: argparse.Namespace) -> int:
    field = read_field(Path(args.field))
    asd = field_asd(field, args.segment_s, args.tukey_alpha, psd=args.psd)
    write_asd(Path(args.output), asd)
    _LOGGER.info("%d segments at %.4g Hz resolution", asd.segments, asd.resolution_hz)
    return EXIT_OK


def _sweep(args: argparse.Namespace) -> int:
    points = sideband_sweep(b_rms=args.b_rms_tesla)
    write_table(
        _out_dir(args) / SWEEP_TABLE,
        [
            [p.f_m_hz for p in points],
            [p.modulation_index for p in points],
            [p.predicted for p in points],
            [p.measured_lower for p in points],
            [p.measured_upper for p in points],
        ],
        "f_m_hz, modulation_index, predicted, measured_lower, measured_upper",
    )
    _emit(args, points)
    return EXIT_OK


def _phase_noise(args: argparse.Namespace) -> int:
    rows = phase_noise_table(_measured_leeson(args.f_leeson_hz))
    write_table(
        _out_dir(args) / PHASE_NOISE_TABLE,
        [
            [r.offset_hz for r in rows],
            [r.l_dbchz for r in rows],
            [r.sensitivity_t_per_rthz for r in rows],
        ],
        "offset_hz, l_dbchz, sensitivity_t_per_rthz",
    )
    _emit(args, rows)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="yig-magnetometer",
        description="Simulate a YIG-oscillator magnetometer and analyse its records.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
    parser.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    parser.add_argument("--out-dir", default=".", help="directory for run outputs")
    parser.add_argument(
        "--format",
        choices=[f.value for f in OutputFormat],
        default=OutputFormat.TEXT.value,
    )
    parser.add_argument("--verbose", "-v", action="store_true", help="log at debug level")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(
        name: str, handler: Callable[[argparse.Namespace], int], summary: str
    ) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=summary)
        p.set_defaults(handler=handler)
        return p

    p = command("run", _run, "run a scenario file end to end")
    p.add_argument("config", help="TOML scenario file")
    p.add_argument(
        "--block-size", type=int, default=None, help="override [sampling] block_size"
    )

    p = command("fit-leeson", _fit_leeson, "fit the Leeson model to an L(f) table")
    p.add_argument("spectrum", help="table of offset_hz, l_dbchz")
    p.add_argument("--p-sustain-dbm", type=float, default=None)
    p.add_argument("--p-sustain-w", type=float, default=None)
    p.add_argument("--temperature-k", type=float, default=TEMPERATURE_K)
    p.add_argument("--f-min-hz", type=float, default=DEFAULT_FIT_F_MIN_HZ)

    p = command("extract-kappas", _extract_kappas, "coupling rates from an S-parameter sweep")
    p.add_argument("sweep", help="table of freq_hz, re/im S11, re/im S21")

    p = command("limits", _limits, "fundamental sensitivity limits and tolerances")
    p.add_argument("--diameter-m", type=float, default=SPHERE_DIAMETER_M)
    p.add_argument("--spin-density-per-m3", type=float, default=SPIN_DENSITY_PER_M3)
    p.add_argument("--b-rf-tesla", type=float, default=B_RF_TESLA)
    p.add_argument("--t1-s", type=float, default=None)
    p.add_argument("--t2-s", type=float, default=T2_S)
    p.add_argument("--b-perp-tesla", type=float, default=5e-5)
    p.add_argument("--b-par-tesla", type=float, default=0.0)
    p.add_argument("--b0-tesla", type=float, default=B0_TESLA)

    p = command("encode", _encode, "synthesize an oscillator waveform from a field record")
    p.add_argument("field", help="field table or .bin record")
    p.add_argument("output", help="waveform .bin path; the sidecar is written next to it")
    p.add_argument("--carrier-hz", type=float, default=DEFAULT_CARRIER_HZ)
    p.add_argument("--b0-tesla", type=float, default=B0_TESLA)
    p.add_argument("--leeson", action="store_true", help="add Leeson phase noise")

    p = command("demod", _demod, "recover the field from a waveform record")
    p.add_argument("waveform")
    p.add_argument("output", help="field table or .bin path")
    p.add_argument("--b0-tesla", type=float, default=B0_TESLA)
    p.add_argument("--lo-offset-hz", type=float, default=None)
    p.add_argument("--block-size", type=int, default=DEFAULT_BLOCK_SIZE)

    p = command("asd", _asd, "segment-averaged ASD of a field record")
    p.add_argument("field")
    p.add_argument("output", help="ASD table path; metadata goes to a JSON sidecar")
    p.add_argument("--segment-s", type=float, default=DEFAULT_SEGMENT_S)
    p.add_argument("--tukey-alpha", type=float, default=DEFAULT_TUKEY_ALPHA)
    p.add_argument("--psd", action="store_true", help="write T^2/Hz instead of T/sqrt(Hz)")

    p = command("sweep", _sweep, "sideband amplitude against modulation frequency")
    p.add_argument("--b-rms-tesla", type=float, default=SWEEP_B_RMS_TESLA)

    p = command("phase-noise", _phase_noise, "L(f) and field sensitivity against offset")
    p.add_argument("--f-leeson-hz", type=float, default=F_LEESON_HZ)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    _LOGGER.info(STARTUP_MESSAGE)
    try:
        return args.handler(args)
    except (ConfigError, ValidationError, OSError) as exc:
        _LOGGER.error("%s", exc)
        return EXIT_CONFIG_ERROR
    except (NumericalError, StageError) as exc:
        _LOGGER.error("%s", exc)
        return EXIT_NUMERICAL_ERROR
