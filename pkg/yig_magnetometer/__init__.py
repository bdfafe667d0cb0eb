"""Simulator for a magnetometer read out through a YIG-sphere oscillator."""

from .const import VERSION

__version__ = VERSION
