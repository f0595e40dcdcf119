"""Numerical laboratory for degenerate elliptic equations with nonlinear
Neumann-type boundary conditions: assumption probes, boundary-shift and
test-function machinery, a monotone finite-difference solver, and rate
experiment harnesses."""

__version__ = "0.1.0"
