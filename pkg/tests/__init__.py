"""Tests for the YIG magnetometer simulator."""
