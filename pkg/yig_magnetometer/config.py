"""Scenario configuration: TOML files, environment overrides and unit conversion.

Every physical key carries a unit suffix. Coupling rates are written as
non-angular Hz and converted to rad/s here; ``p_sustain_dbm`` is converted to
watts here and nowhere else.
"""

from __future__ import annotations

import copy
import logging
import math
import os
from pathlib import Path
import re

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from typing import Any, Mapping

from pydantic import ValidationError

from .const import (
    CONF_ANALYSIS,
    CONF_B0_TESLA,
    CONF_B_RMS_TESLA,
    CONF_BLOCK_SIZE,
    CONF_CHOP,
    CONF_DEMAG,
    CONF_DURATION_S,
    CONF_DUTY,
    CONF_ENABLED,
    CONF_F_CORNER_HZ,
    CONF_F_HZ,
    CONF_F_LEESON_HZ,
    CONF_FIT_F_MIN_HZ,
    CONF_IF_HZ,
    CONF_K1_OVER_MU0MS_TESLA,
    CONF_KAPPA0_HZ,
    CONF_KAPPA1_HZ,
    CONF_KAPPA2_HZ,
    CONF_LEESON,
    CONF_MS_A_PER_M,
    CONF_NOISE_BAND_HIGH_HZ,
    CONF_NOISE_BAND_LOW_HZ,
    CONF_NOISE_FACTOR,
    CONF_P_SUSTAIN_DBM,
    CONF_P_SUSTAIN_W,
    CONF_PERIOD_S,
    CONF_PHASE_RAD,
    CONF_RESONATOR,
    CONF_SAMPLE_RATE_HZ,
    CONF_SAMPLING,
    CONF_SEED,
    CONF_SEGMENT_S,
    CONF_TEMPERATURE_K,
    CONF_THETA_RAD,
    CONF_TONES,
    CONF_TUKEY_ALPHA,
    ENV_PREFIX,
    ENV_SEPARATOR,
)
from .errors import ConfigError, ParseError
from .models import Analysis, ChopSchedule, Sampling, Scenario, Tone
from .physics.const import (
    F_CORNER_HZ,
    F_LEESON_HZ,
    KAPPA0,
    KAPPA1,
    KAPPA2,
    NOISE_FACTOR,
    P_SUSTAIN_W,
    TEMPERATURE_K,
)
from .physics.models import LeesonModel, ResonatorModel

_LOGGER: logging.Logger = logging.getLogger(__package__)

_TOML_LINE = re.compile(r"line (\d+)")
_TWO_PI = 2 * math.pi


def dbm_to_watts(dbm: float) -> float:
    return 1e-3 * 10 ** (dbm / 10)


def load_config(path: Path) -> dict[str, Any]:
    try:
        with open(path, "rb") as handle:
            return tomllib.load(handle)
    except tomllib.TOMLDecodeError as exc:
        match = _TOML_LINE.search(str(exc))
        raise ParseError(str(path), int(match.group(1)) if match else 0, str(exc)) from exc
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc


def _parse_env_value(raw: str) -> Any:
    try:
        return tomllib.loads(f"value = {raw}")["value"]
    except tomllib.TOMLDecodeError:
        return raw


def apply_env_overrides(
    config: Mapping[str, Any], environ: Mapping[str, str] | None = None
) -> dict[str, Any]:
    """Overlay ``YIGMAG_<SECTION>__<KEY>`` variables onto a copy of ``config``.

    Integer path segments index into arrays of tables, e.g.
    ``YIGMAG_TONES__0__F_HZ``.
    """
    environ = os.environ if environ is None else environ
    merged = copy.deepcopy(dict(config))
    for name in sorted(environ):
        if not name.startswith(ENV_PREFIX):
            continue
        path = name[len(ENV_PREFIX) :].lower().split(ENV_SEPARATOR)
        node: Any = merged
        for segment in path[:-1]:
            if isinstance(node, list):
                try:
                    node = node[int(segment)]
                except (ValueError, IndexError) as exc:
                    raise ConfigError(f"{name}: no array entry {segment}") from exc
            else:
                node = node.setdefault(segment, {})
            if not isinstance(node, (dict, list)):
                raise ConfigError(f"{name}: {segment} is not a table")
        value = _parse_env_value(environ[name])
        if isinstance(node, list):
            raise ConfigError(f"{name}: cannot replace an array entry as a whole")
        node[path[-1]] = value
        _LOGGER.debug("Config override %s = %r", name, value)
    return merged


def _section(config: Mapping[str, Any], name: str) -> dict[str, Any] | None:
    value = config.get(name)
    if value is None:
        return None
    if not isinstance(value, dict):
        raise ConfigError(f"[{name}] must be a table")
    return dict(value)


def _check_consumed(name: str, section: Mapping[str, Any]) -> None:
    if section:
        raise ConfigError(f"unknown keys in [{name}]: {', '.join(sorted(section))}")


def _resonator(section: dict[str, Any]) -> ResonatorModel:
    values: dict[str, Any] = {
        "kappa0": _TWO_PI * section.pop(CONF_KAPPA0_HZ, KAPPA0 / _TWO_PI),
        "kappa1": _TWO_PI * section.pop(CONF_KAPPA1_HZ, KAPPA1 / _TWO_PI),
        "kappa2": _TWO_PI * section.pop(CONF_KAPPA2_HZ, KAPPA2 / _TWO_PI),
    }
    for key, field in (
        (CONF_B0_TESLA, "b0"),
        (CONF_MS_A_PER_M, "ms"),
        (CONF_DEMAG, "demag"),
        (CONF_K1_OVER_MU0MS_TESLA, "k1_over_mu0ms"),
        (CONF_THETA_RAD, "theta"),
    ):
        if key in section:
            values[field] = section.pop(key)
    _check_consumed(CONF_RESONATOR, section)
    return ResonatorModel(**values)


def _leeson(section: dict[str, Any]) -> LeesonModel | None:
    enabled = section.pop(CONF_ENABLED, True)
    if CONF_P_SUSTAIN_W in section and CONF_P_SUSTAIN_DBM in section:
        raise ConfigError(f"give either {CONF_P_SUSTAIN_W} or {CONF_P_SUSTAIN_DBM}, not both")
    if CONF_P_SUSTAIN_DBM in section:
        p_sustain = dbm_to_watts(section.pop(CONF_P_SUSTAIN_DBM))
    else:
        p_sustain = section.pop(CONF_P_SUSTAIN_W, P_SUSTAIN_W)
    model = LeesonModel(
        f_leeson=section.pop(CONF_F_LEESON_HZ, F_LEESON_HZ),
        f_corner=section.pop(CONF_F_CORNER_HZ, F_CORNER_HZ),
        noise_factor=section.pop(CONF_NOISE_FACTOR, NOISE_FACTOR),
        p_sustain=p_sustain,
        temperature=section.pop(CONF_TEMPERATURE_K, TEMPERATURE_K),
    )
    _check_consumed(CONF_LEESON, section)
    return model if enabled else None


def _tones(entries: Any) -> tuple[Tone, ...]:
    if entries is None:
        return ()
    if not isinstance(entries, list):
        raise ConfigError(f"[[{CONF_TONES}]] must be an array of tables")
    tones = []
    for entry in entries:
        entry = dict(entry)
        tone = Tone(
            f_hz=entry.pop(CONF_F_HZ),
            b_rms_tesla=entry.pop(CONF_B_RMS_TESLA),
            phase_rad=entry.pop(CONF_PHASE_RAD, 0.0),
        )
        _check_consumed(CONF_TONES, entry)
        tones.append(tone)
    return tuple(tones)


def _simple(name: str, section: dict[str, Any] | None, keys: Mapping[str, str]) -> dict[str, Any]:
    if section is None:
        return {}
    values = {field: section.pop(key) for key, field in keys.items() if key in section}
    _check_consumed(name, section)
    return values


def scenario_from_config(config: Mapping[str, Any]) -> Scenario:
    """Build a scenario from a unit-suffixed mapping. Missing keys take defaults."""
    config = dict(config)
    known = {
        CONF_SEED,
        CONF_RESONATOR,
        CONF_LEESON,
        CONF_TONES,
        CONF_CHOP,
        CONF_SAMPLING,
        CONF_ANALYSIS,
    }
    unknown = set(config) - known
    if unknown:
        raise ConfigError(f"unknown top-level keys: {', '.join(sorted(unknown))}")
    try:
        resonator = _resonator(_section(config, CONF_RESONATOR) or {})
        leeson = _leeson(_section(config, CONF_LEESON) or {})
        chop_section = _section(config, CONF_CHOP)
        chop = (
            None
            if chop_section is None
            else ChopSchedule(
                **_simple(CONF_CHOP, chop_section, {CONF_PERIOD_S: "period_s", CONF_DUTY: "duty"})
            )
        )
        sampling = _simple(
            CONF_SAMPLING,
            _section(config, CONF_SAMPLING),
            {
                CONF_SAMPLE_RATE_HZ: "sample_rate_hz",
                CONF_IF_HZ: "if_hz",
                CONF_DURATION_S: "duration_s",
                CONF_BLOCK_SIZE: "block_size",
            },
        )
        analysis_section = _section(config, CONF_ANALYSIS) or {}
        band = None
        if {CONF_NOISE_BAND_LOW_HZ, CONF_NOISE_BAND_HIGH_HZ} & analysis_section.keys():
            default = Analysis().noise_band_hz
            band = (
                analysis_section.pop(CONF_NOISE_BAND_LOW_HZ, default[0]),
                analysis_section.pop(CONF_NOISE_BAND_HIGH_HZ, default[1]),
            )
        analysis = _simple(
            CONF_ANALYSIS,
            analysis_section,
            {
                CONF_SEGMENT_S: "segment_s",
                CONF_TUKEY_ALPHA: "tukey_alpha",
                CONF_FIT_F_MIN_HZ: "fit_f_min_hz",
            },
        )
        if band is not None:
            analysis["noise_band_hz"] = band
        return Scenario(
            resonator=resonator,
            leeson=leeson,
            tones=_tones(config.get(CONF_TONES)),
            chop=chop,
            sampling=Sampling(**sampling),
            analysis=Analysis(**analysis),
            seed=config.get(CONF_SEED, 0),
        )
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc
    except KeyError as exc:
        raise ConfigError(f"missing required key {exc}") from exc
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def scenario_to_config(scenario: Scenario) -> dict[str, Any]:
    """Resolved, unit-suffixed configuration of ``scenario`` (the report echo)."""
    r = scenario.resonator
    leeson: dict[str, Any] = {CONF_ENABLED: scenario.leeson is not None}
    if scenario.leeson is not None:
        leeson.update(
            {
                CONF_F_LEESON_HZ: scenario.leeson.f_leeson,
                CONF_F_CORNER_HZ: scenario.leeson.f_corner,
                CONF_NOISE_FACTOR: scenario.leeson.noise_factor,
                CONF_P_SUSTAIN_W: scenario.leeson.p_sustain,
                CONF_TEMPERATURE_K: scenario.leeson.temperature,
            }
        )
    return {
        CONF_SEED: scenario.seed,
        CONF_RESONATOR: {
            CONF_KAPPA0_HZ: r.kappa0 / _TWO_PI,
            CONF_KAPPA1_HZ: r.kappa1 / _TWO_PI,
            CONF_KAPPA2_HZ: r.kappa2 / _TWO_PI,
            CONF_B0_TESLA: r.b0,
            CONF_MS_A_PER_M: r.ms,
            CONF_DEMAG: list(r.demag),
            CONF_K1_OVER_MU0MS_TESLA: r.k1_over_mu0ms,
            CONF_THETA_RAD: r.theta,
        },
        CONF_LEESON: leeson,
        CONF_TONES: [
            {CONF_F_HZ: t.f_hz, CONF_B_RMS_TESLA: t.b_rms_tesla, CONF_PHASE_RAD: t.phase_rad}
            for t in scenario.tones
        ],
        CONF_CHOP: None
        if scenario.chop is None
        else {CONF_PERIOD_S: scenario.chop.period_s, CONF_DUTY: scenario.chop.duty},
        CONF_SAMPLING: {
            CONF_SAMPLE_RATE_HZ: scenario.sampling.sample_rate_hz,
            CONF_IF_HZ: scenario.sampling.if_hz,
            CONF_DURATION_S: scenario.sampling.duration_s,
            CONF_BLOCK_SIZE: scenario.sampling.block_size,
        },
        CONF_ANALYSIS: {
            CONF_SEGMENT_S: scenario.analysis.segment_s,
            CONF_TUKEY_ALPHA: scenario.analysis.tukey_alpha,
            CONF_NOISE_BAND_LOW_HZ: scenario.analysis.noise_band_hz[0],
            CONF_NOISE_BAND_HIGH_HZ: scenario.analysis.noise_band_hz[1],
            CONF_FIT_F_MIN_HZ: scenario.analysis.fit_f_min_hz,
        },
    }


def load_scenario(path: Path, environ: Mapping[str, str] | None = None) -> Scenario:
    config = apply_env_overrides(load_config(path), environ)
    _LOGGER.info("Loaded scenario from %s", path)
    return scenario_from_config(config)
