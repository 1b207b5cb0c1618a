import numpy as np
import pytest
from hypothesis import given, strategies as st

from zwitter.potentials import Potential, parse_potential


@pytest.mark.parametrize("pot", [Potential.free(), Potential.harmonic(1.3), Potential.quartic(1.0, 0.1),
                                 Potential.double_well(1.0, 4.0),
                                 Potential.gaussian_barrier(2.0, 0.5, (-1.0, 1.0))])
def test_text_round_trip_and_derivative(pot):
    for style in ("cli", "expr"):
        assert parse_potential(pot.to_text(style)) == pot
    z = np.linspace(-3, 3, 41)
    h = 1e-5
    fd = (pot(z + h) - pot(z - h)) / (2 * h)
    assert np.allclose(pot.derivative(z), fd, atol=1e-6)


def test_cli_form_with_defaults():
    assert parse_potential("quartic:omega=1,lambda=0.1") == Potential.quartic(1.0, 0.1)
    assert parse_potential("double_well") == Potential.double_well()


@pytest.mark.parametrize("text", ["cubic:a=1", "quartic:mu=2", "harmonic:omega"])
def test_bad_text(text):
    with pytest.raises(ValueError):
        parse_potential(text)


def test_confinement_flags():
    assert Potential.quartic().confining and not Potential.free().confining
    assert Potential.harmonic().is_quadratic and not Potential.quartic().is_quadratic


@given(st.floats(0.1, 3), st.floats(0.0, 1.0))
def test_quartic_values(omega, lam):
    pot = Potential.quartic(omega, lam)
    z = np.array([0.0, 1.0, -2.0])
    assert np.allclose(pot(z), omega ** 2 * z ** 2 / 2 + lam * z ** 4)
