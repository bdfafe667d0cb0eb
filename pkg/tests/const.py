"""Reference values for the YIG magnetometer tests."""

import math

TWO_PI = 2 * math.pi

MOCK_KAPPAS_HZ = (790e3, 315e3, 405e3)

# Leeson fit of the free-running oscillator and its quoted phase noise
MOCK_LEESON = {"f_leeson": 600e3, "f_corner": 6.6e3, "noise_factor": 8.0}
MEASURED_L_10K_DBCHZ = -132.8
MEASURED_L_100K_DBCHZ = -154.4

MOCK_SCENARIO_TOML = """
seed = 3

[resonator]
kappa0_hz = 790e3
kappa1_hz = 315e3
kappa2_hz = 405e3

[leeson]
f_leeson_hz = 600e3
f_corner_hz = 6.6e3
noise_factor = 8
p_sustain_dbm = 3.0103

[[tones]]
f_hz = 35e3
b_rms_tesla = 0.9e-12

[chop]
period_s = 2.0

[sampling]
sample_rate_hz = 1e6
if_hz = 200e3
duration_s = 4.0
"""
