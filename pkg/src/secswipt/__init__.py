"""Robust secure beamforming for multicell time-switching SWIPT networks."""

__version__ = "0.1.0"
