"""Physics and signal chain of the YIG oscillator magnetometer."""
