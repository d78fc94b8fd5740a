"""Holonomic gate - closed-form non-adiabatic holonomic gates for a spin-3/2 quadrupole in a rotating field."""

__version__ = "0.3.0"
