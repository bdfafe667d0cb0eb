"""Physical constants and working values of the YIG oscillator magnetometer."""

import math

from scipy import constants

# Gyromagnetic ratio, rounded table value. CODATA differs by ~0.3 %; the rounded
# value keeps every quoted figure reproducible.
GAMMA_HZ_PER_TESLA = 28e9
GAMMA = 2 * math.pi * GAMMA_HZ_PER_TESLA  # rad/s/T

HBAR = constants.hbar
K_B = constants.k
MU_0 = constants.mu_0
MU_B = constants.physical_constants["Bohr magneton"][0]
G_E = abs(constants.physical_constants["electron g factor"][0])

SPHERE_DEMAG = (1 / 3, 1 / 3, 1 / 3)

# Resonator working point
B0_TESLA = 0.178
MS_A_PER_M = 1.42e5
K1_OVER_MU0MS_TESLA = -4.2e-3
KAPPA0 = 2 * math.pi * 790e3
KAPPA1 = 2 * math.pi * 315e3
KAPPA2 = 2 * math.pi * 405e3

# Leeson fit of the free-running oscillator
F_LEESON_HZ = 600e3
F_CORNER_HZ = 6.6e3
NOISE_FACTOR = 8.0
P_SUSTAIN_W = 2e-3
TEMPERATURE_K = 300.0

# Commercial YIG oscillator used for comparison
COMMERCIAL_F_LEESON_HZ = 5.2e6

# 1 mm sphere
SPHERE_DIAMETER_M = 1e-3
SPIN_DENSITY_PER_M3 = 1.5e28
ZERO_TEMPERATURE_SPIN_DENSITY_PER_M3 = 2.1e28
ROOM_TEMPERATURE_MAGNETIZATION_FRACTION = 0.72
T2_STAR_S = 570e-9
Q0 = 8900.0

# Microwave drive of the sphere inside the loop
B_RF_TESLA = 2e-6
T2_S = 1 / (math.pi * 790e3)

# Validity and warning thresholds
S_PARAMETER_VALIDITY_LINEWIDTHS = 50.0
NARROWBAND_FM_MAX_INDEX = 0.1
LINEAR_REGIME_MAX_RATIO = 1e-3
BEDROSIAN_BAND_FRACTION = 0.1
BEDROSIAN_POWER_TOLERANCE = 1e-6
OCCUPIED_POWER_FRACTION = 1 - 1e-6
MIN_SAMPLE_RATE_OVER_F_LEESON = 4.0

# Synthesis and estimation
MIN_NOISE_SAMPLES = 2**14
# Welch segments estimated together before averaging across chunks
WELCH_CHUNK_SEGMENTS = 64
NOISE_BAND_LOW_RECORD_MULTIPLE = 40.0
DEFAULT_FIT_F_MIN_HZ = 3e3
MIN_FIT_POINTS = 10
MIN_FIT_SPAN_DB = 1.0
BLOCK_MARGIN_SAMPLES = 2**12

# Spectral estimation
DEFAULT_SEGMENT_S = 1.0
DEFAULT_TUKEY_ALPHA = 0.01
ASD_CONVENTION = "single-sided, ± bins combined in quadrature"

# Encode helpers
DEFAULT_CARRIER_HZ = 10e6
