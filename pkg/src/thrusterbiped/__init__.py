"""Thruster-assisted bipedal robot simulation.

Full rigid-body dynamics with compliant ground contact, reduced-order
models for control, a reference governor enforcing ground-reaction-force
constraints during walking, and a predictive controller for ballistic
jumps. See README.md for the CLI and the acceptance suite.
"""

__version__ = "0.1.0"
