"""Spectral workbench for the truncated periodic dispersive flow with
Gaussian white-noise data: sampling, evolution, invariance testing, and
numerical estimates for the supporting inequalities."""

__version__ = "0.1.0"
