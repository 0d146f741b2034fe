"""Simulation and control toolkit for a tethered fixed-wing aircraft launched from a ground station."""

__version__ = "0.1.0"
