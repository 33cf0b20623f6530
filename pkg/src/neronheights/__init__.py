"""Local Néron pairings, Néron-Tate heights and regulators for Jacobians of curves over Q."""

__version__ = "0.1.0"
