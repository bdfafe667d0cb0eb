"""Constants for the YIG magnetometer simulator."""

from enum import Enum

NAME = "YIG Magnetometer"
DOMAIN = "yig_magnetometer"
VERSION = "1.0.0"

ENV_PREFIX = "YIGMAG_"
ENV_SEPARATOR = "__"

EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_ERROR = 3

# Configuration sections and keys. Every physical quantity carries its unit.
CONF_SEED = "seed"

CONF_RESONATOR = "resonator"
CONF_KAPPA0_HZ = "kappa0_hz"
CONF_KAPPA1_HZ = "kappa1_hz"
CONF_KAPPA2_HZ = "kappa2_hz"
CONF_B0_TESLA = "b0_tesla"
CONF_MS_A_PER_M = "ms_a_per_m"
CONF_DEMAG = "demag"
CONF_K1_OVER_MU0MS_TESLA = "k1_over_mu0ms_tesla"
CONF_THETA_RAD = "theta_rad"

CONF_LEESON = "leeson"
CONF_ENABLED = "enabled"
CONF_F_LEESON_HZ = "f_leeson_hz"
CONF_F_CORNER_HZ = "f_corner_hz"
CONF_NOISE_FACTOR = "noise_factor"
CONF_P_SUSTAIN_W = "p_sustain_w"
CONF_P_SUSTAIN_DBM = "p_sustain_dbm"
CONF_TEMPERATURE_K = "temperature_k"

CONF_TONES = "tones"
CONF_F_HZ = "f_hz"
CONF_B_RMS_TESLA = "b_rms_tesla"
CONF_PHASE_RAD = "phase_rad"

CONF_CHOP = "chop"
CONF_PERIOD_S = "period_s"
CONF_DUTY = "duty"

CONF_SAMPLING = "sampling"
CONF_SAMPLE_RATE_HZ = "sample_rate_hz"
CONF_IF_HZ = "if_hz"
CONF_DURATION_S = "duration_s"
CONF_BLOCK_SIZE = "block_size"

CONF_ANALYSIS = "analysis"
CONF_SEGMENT_S = "segment_s"
CONF_TUKEY_ALPHA = "tukey_alpha"
CONF_NOISE_BAND_LOW_HZ = "noise_band_low_hz"
CONF_NOISE_BAND_HIGH_HZ = "noise_band_high_hz"
CONF_FIT_F_MIN_HZ = "fit_f_min_hz"

# Scenario defaults: post-mixdown digitizer rate and intermediate frequency.
DEFAULT_SAMPLE_RATE_HZ = 5e6
DEFAULT_IF_HZ = 1e6
DEFAULT_DURATION_S = 10.0
# Hilbert transform block length; shorter records are transformed whole.
DEFAULT_BLOCK_SIZE = 2**22
DEFAULT_NOISE_BAND_HZ = (20e3, 50e3)

# Sideband sweep
SWEEP_CARRIER_HZ = 10e6
SWEEP_SAMPLE_RATE_HZ = 200e6
SWEEP_DURATION_S = 1e-3
SWEEP_B_RMS_TESLA = 2.12e-6
SWEEP_F_M_HZ = (1e6, 1.5e6, 2e6, 3e6, 4e6, 5e6)

# Phase-noise table offsets (Hz)
TABLE_OFFSETS_PER_DECADE = 10
TABLE_OFFSET_RANGE_HZ = (1e3, 1e7)

REPORT_FILE = "report.json"
ASD_FILE = "asd.txt"
FIELD_FILE = "field.bin"
CHOP_FILE = "chop.txt"


class Stage(Enum):
    """Pipeline stages of a scenario run."""

    ENCODE = "encode"
    DEMOD = "demod"
    SPECTRAL = "spectral"
    FIT = "fit"


class OutputFormat(Enum):
    TEXT = "text"
    JSON = "json"


STARTUP_MESSAGE = f"""
-------------------------------------------------------------------
{NAME}  v{VERSION}
YIG oscillator magnetometer simulator
-------------------------------------------------------------------
"""
