"""Collapse rates of rigid bodies in the CSL model.

This package computes how fast a superposition of a rigid body at two
positions is reduced under Continuous Spontaneous Localization: exact rates
for continuous homogeneous bodies, rates for crystals of point-like sites,
the Euler–Maclaurin link between the two, and diffusion coefficients of
layered bodies.
"""

__version__ = "0.1.0"
