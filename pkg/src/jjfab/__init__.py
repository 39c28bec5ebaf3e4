"""Josephson-junction fabrication variability simulator and measurement analysis."""

__version__ = "0.1.0"
