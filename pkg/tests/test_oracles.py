"""Sanity checks for the reference implementations themselves."""

import math
import sys
from pathlib import Path

import numpy as np
import pytest

# Add project root to path
project_root = Path(__file__).parent.parent
if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))

from engine.oracles import (
    commuting_heat_exact,
    ode_reference,
    pvar_bruteforce,
    trapezoid_iterated,
)


def test_pvar_bruteforce_small_cases():
    assert pvar_bruteforce(np.array([0.0, 1.0, 0.0]), 1.0) == pytest.approx(2.0)
    assert pvar_bruteforce(np.array([0.0, 1.0, 0.0]), 2.0) == pytest.approx(math.sqrt(2.0))
    with pytest.raises(ValueError):
        pvar_bruteforce(np.zeros(20), 2.0)
    with pytest.raises(ValueError):
        pvar_bruteforce(np.zeros(1), 2.0)


def test_trapezoid_iterated_is_exact_for_linear_integrands():
    t = np.linspace(0.0, 2.0, 11)
    assert trapezoid_iterated(t, t) == pytest.approx(2.0)


def test_commuting_heat_exact():
    x = np.arange(16) / 16
    u0 = np.sin(2 * np.pi * x)
    t = 0.01
    decay = math.exp(-((2 * np.pi) ** 2) * t)
    np.testing.assert_allclose(commuting_heat_exact(u0, 0.0, 0.3, t), decay * u0, atol=1e-12)
    strat = commuting_heat_exact(u0, 2.0, 0.3, t)
    ito = commuting_heat_exact(u0, 2.0, 0.3, t, mode="ito")
    np.testing.assert_allclose(ito, math.exp(-2.0 * t) * strat, atol=1e-12)
    with pytest.raises(ValueError):
        commuting_heat_exact(u0, x, 0.3, t)
    with pytest.raises(ValueError):
        commuting_heat_exact(u0, 1.0, 0.3, t, mode="marcus")


def test_ode_reference():
    times, values = ode_reference("linear", 1.0, 1.0, times=np.array([0.0, 0.5, 1.0]))
    np.testing.assert_allclose(values, np.exp(times), rtol=1e-10)
    _, cubic = ode_reference("cubic", 0.5, 5.0)
    assert cubic[-1] == pytest.approx(1.0, abs=1e-3)
    with pytest.raises(ValueError):
        ode_reference("logistic", 0.5, 1.0)
