"""System-level simulator of an integrated terrestrial and LEO-satellite network serving ground users and UAVs."""

__version__ = "0.1.0"
