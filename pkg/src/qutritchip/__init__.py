"""Numerical model of a silicon-photonic two-qutrit entanglement chip."""
