import math

import numpy as np
import pytest

from zwitter import Potential, make_grid
from zwitter.experiments.spectroscopy import (FitError, _crossing, fit_power_law, run_double_well_proximity,
                                              scan_gamma, zwitter_ground_state)


def test_power_law_fit_recovers_exponent():
    gammas = np.array([0.05, 0.1, 0.2, 0.3, 0.5])
    fit = fit_power_law(gammas, 3.0 * np.sin(gammas) ** 2.0)
    assert fit.slope == pytest.approx(1.0, abs=1e-12)
    assert fit.intercept == pytest.approx(math.log(3.0), abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0) and fit.n_points == 5


def test_power_law_fit_needs_four_points():
    with pytest.raises(FitError):
        fit_power_law([0.0, 0.1, 0.2, 0.3], [1.0, 1.0, 2.0, 3.0])


def test_crossing_of_synthetic_ratios():
    gammas = np.array([0.0, 0.05, 0.1, 0.2, 0.3])
    g_star = 0.15
    ratios = (np.sin(gammas) / math.sin(g_star)) ** 2
    found, spread = _crossing(gammas, ratios, np.random.default_rng(0))
    assert found == pytest.approx(g_star, abs=1e-10)
    assert spread == pytest.approx(0.0, abs=1e-10)
    assert _crossing(gammas, ratios * 100, np.random.default_rng(0)) == (None, None)


@pytest.fixture(scope="module")
def harmonic_grid():
    return make_grid(64, 64, 14.0)


def test_harmonic_ground_state_is_stationary_for_any_gamma(harmonic_grid):
    """Moyal and Liouville agree for quadratic potentials, so the width stays at round-off."""
    rho, res = zwitter_ground_state(harmonic_grid, Potential.harmonic(1.0), 0.4, relaxation=1.0, window=2.0)
    assert res.E0 == pytest.approx(0.5, abs=1e-8)
    assert res.width < 1e-5
    assert res.stationary
    assert rho.trace() == pytest.approx(1.0, abs=1e-6)


def test_quartic_width_grows_with_gamma(harmonic_grid):
    results, fits = scan_gamma(harmonic_grid, Potential.quartic(1.0, 0.1), [0.1, 0.2, 0.3, 0.4],
                               relaxation=2.0, window=4.0)
    widths = [r.width for r in results]
    assert all(b > a for a, b in zip(widths, widths[1:]))
    assert fits["width"].slope == pytest.approx(1.0, abs=0.2)


def test_rejects_unsuitable_inputs(harmonic_grid):
    with pytest.raises(ValueError):
        zwitter_ground_state(harmonic_grid, Potential.free(), 0.1)
    with pytest.raises(ValueError):
        zwitter_ground_state(harmonic_grid, Potential.harmonic(), 0.1, window=0.0)
    with pytest.raises(ValueError):
        run_double_well_proximity(harmonic_grid, Potential.harmonic(), [0.1])
