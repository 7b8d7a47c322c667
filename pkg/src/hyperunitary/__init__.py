"""Exact computations with form rings and hyperbolic unitary groups."""
