"""Adaptive wave models for option pricing: NLS closed forms, Manakov solitons,
quantum wave packets, a split-step propagator and Levenberg-Marquardt fit harnesses."""

__version__ = "0.1.0"
