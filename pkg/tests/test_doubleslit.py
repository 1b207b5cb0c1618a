import math

import numpy as np
import pytest

from zwitter import Potential
from zwitter.experiments.doubleslit import (FREE_CONFIG, DoubleSlitConfig, fringe_spacing, fringe_visibility,
                                            run_double_slit, schrodinger_profile)


def test_visibility_of_synthetic_fringes():
    z = np.linspace(-8, 8, 801)
    intensity = 1.0 + 0.6 * np.cos(2 * math.pi * z / 1.5)
    assert fringe_visibility(z, intensity, (-8, 8)) == pytest.approx(0.6, abs=1e-3)
    assert fringe_visibility(z, np.zeros_like(z), (-8, 8)) == 0.0


def test_spacing_of_synthetic_fringes():
    z = np.linspace(-8, 8, 257)
    intensity = 1.0 + np.cos(2 * math.pi * (z - 0.1) / 1.37)
    assert fringe_spacing(z, intensity, (-8, 8)) == pytest.approx(1.37, abs=5e-3)
    assert fringe_spacing(z, np.exp(-z ** 2), (-8, 8)) is None


def test_config_validation_and_refinement():
    with pytest.raises(ValueError):
        DoubleSlitConfig(gammas=(2.0,))
    with pytest.raises(ValueError):
        DoubleSlitConfig(horizon=0.0)
    cfg = DoubleSlitConfig()
    fine = cfg.refined()
    assert (fine.n_z, fine.n_p, fine.dt) == (512, 512, cfg.dt / 2)
    assert cfg.detector_window == (-8.0, 8.0)


def test_free_flight_fringes_match_schrodinger():
    cfg = DoubleSlitConfig(n_z=288, n_p=288, z_extent=48.0, potential=Potential.free(), separation=6.0,
                           gammas=(0.0, math.pi / 2), horizon=2.0, dt=1e-2)
    profiles = run_double_slit(cfg)
    reference = schrodinger_profile(cfg)
    # exact fringe period for two spreading Gaussians (hbar = m = 1)
    tau = cfg.horizon / (2 * cfg.width ** 2)
    expected = 4 * math.pi * cfg.width ** 2 * (1 + tau ** 2) / (cfg.separation * tau)
    for prof in profiles:
        # without a potential gamma has no effect
        assert prof.visibility == pytest.approx(reference.visibility, rel=1e-6)
        assert prof.spacing == pytest.approx(reference.spacing, abs=1e-6)
    # the Gaussian envelope pulls the measured maxima slightly towards the centre
    assert reference.spacing == pytest.approx(expected, rel=0.02)
    assert FREE_CONFIG.gammas == (0.0,)
