"""Fundamental limits and error budget of a YIG-sphere magnetometer.

Spin-projection and thermal limits are quoted in T*sqrt(s), referenced to a
one-second measurement, and are never converted to T/sqrt(Hz). The thermal
limit carries an order-unity prefactor uncertainty that is not modelled.
"""

from __future__ import annotations

import math

from .const import B0_TESLA, B_RF_TESLA, G_E, GAMMA, HBAR, K_B, MU_B, T2_S
from .models import FiniteBiasError, LimitsBudget, SphereSpec


def sphere_volume(diameter: float) -> float:
    return math.pi * diameter**3 / 6


def spin_density_from_magnetization(ms: float) -> float:
    """Density of polarized unpaired spins, one Bohr magneton each."""
    return ms / MU_B


def spin_projection_limit(spec: SphereSpec) -> float:
    return (HBAR / (G_E * MU_B)) / math.sqrt(spec.spin_count * spec.t2_star)


def thermal_limit(spec: SphereSpec) -> float:
    return math.sqrt(K_B * spec.temperature / (GAMMA * spec.ms * spec.volume * spec.q0))


def tip_angle(b_rf: float, t1: float | None = None, t2: float = T2_S) -> float:
    """Steady-state precession cone angle, arccos[1 / (1 + gamma^2 B_rf^2 T1 T2 / 4)].

    ``t1`` defaults to ``t2 / 2``. Evaluated through the half-angle form so that
    small angles keep full precision.
    """
    if t1 is None:
        t1 = t2 / 2
    drive = 0.25 * (GAMMA * b_rf) ** 2 * t1 * t2
    return 2 * math.asin(math.sqrt(drive / (2 * (1 + drive))))


def finite_bias_error(b_perp: float, b_par: float, b0: float) -> FiniteBiasError:
    """Projection read by a scalar magnetometer and its second-order error.

    ``exact_deviation`` is |B| - B0 for reference.
    """
    error = b_perp**2 / (2 * b0)
    total = math.hypot(b0 + b_par, b_perp)
    exact = (2 * b0 * b_par + b_par**2 + b_perp**2) / (total + b0)
    return FiniteBiasError(measured_projection=b_par + error, error=error, exact_deviation=exact)


def gradient_tolerance(kappa0: float, length_scale: float) -> float:
    """Gradient that spreads the resonance across the sphere by one linewidth, T/m."""
    return kappa0 / (GAMMA * length_scale)


def budget(
    spec: SphereSpec,
    b_rf: float = B_RF_TESLA,
    t1: float | None = None,
    t2: float = T2_S,
    b_perp: float = 5e-5,
    b_par: float = 0.0,
    b0: float = B0_TESLA,
    kappa0: float = 2 * math.pi * 1e6,
    length_scale: float | None = None,
) -> LimitsBudget:
    spl = spin_projection_limit(spec)
    the = thermal_limit(spec)
    return LimitsBudget(
        sphere_volume_m3=spec.volume,
        spin_count=spec.spin_count,
        spin_projection_limit_t_rts=spl,
        thermal_limit_t_rts=the,
        thermal_to_spin_projection_ratio=the / spl,
        tip_angle_rad=tip_angle(b_rf, t1, t2),
        finite_bias_error_tesla=finite_bias_error(b_perp, b_par, b0).error,
        gradient_tolerance_t_per_m=gradient_tolerance(
            kappa0, spec.diameter if length_scale is None else length_scale
        ),
    )
