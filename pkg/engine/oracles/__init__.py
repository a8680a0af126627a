"""Brute-force and closed-form references used by the test suite."""

from engine.oracles.references import (
    commuting_heat_exact,
    ode_reference,
    pvar_bruteforce,
    trapezoid_iterated,
)

__all__ = ["commuting_heat_exact", "ode_reference", "pvar_bruteforce", "trapezoid_iterated"]
