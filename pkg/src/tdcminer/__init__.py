"""Evolutionary template mining for state-sequence sets, with a surrogate
layer that predicts run quality and performance from GA parameters and
set descriptors."""

__version__ = "0.1.0"
