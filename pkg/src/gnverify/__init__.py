"""Numerical certification of weighted second-order interpolation inequalities
and a priori estimates for ODEs of the form f'' = g * tau(f)."""

__version__ = "0.1.0"
