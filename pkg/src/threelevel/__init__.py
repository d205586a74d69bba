"""Continuous three-level quantum heat engine: steady-state thermodynamics
and the L9 orthogonal-test analysis over temperature difference and
dissipation modes."""

__version__ = "0.1.0"
