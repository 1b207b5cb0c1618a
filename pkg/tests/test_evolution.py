import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from zwitter import Potential, make_grid
from zwitter.evolution import (BoundaryMassError, PropagatorConfig, evolve, liouville_characteristics,
                               schrodinger_evolve, step_zwitter)
from zwitter.observables import classical_expectation
from zwitter.state import gaussian_packet, pure_state_density

QUARTIC = Potential.quartic(1.0, 0.1)


@pytest.fixture(scope="module")
def grid():
    return make_grid(96, 96, 16.0)


@pytest.fixture(scope="module")
def packet(grid):
    return pure_state_density(gaussian_packet(grid, 0.5, 0.3))[1]


def test_complex_path_matches_real_path(grid, packet):
    for scheme in ("strang", "yoshida4"):
        fast = evolve(packet, QUARTIC, PropagatorConfig(0.7, 1e-2, scheme), 0.1)[0]
        slow = evolve(packet, QUARTIC, PropagatorConfig(0.7, 1e-2, scheme, check_reality=True), 0.1)[0]
        assert np.max(np.abs(fast.values - slow.values)) < 1e-10


@settings(max_examples=10)
@given(st.floats(0.0, math.pi / 2))
def test_norm_is_conserved(grid, packet, gamma):
    out, report = evolve(packet, QUARTIC, PropagatorConfig(gamma, 1e-2), 0.5, report_every=10)
    assert max(abs(n - 1.0) for n in report.norm) < 1e-12
    assert out.norm() == pytest.approx(1.0, abs=1e-12)


def test_report_rows_and_step_count(grid, packet):
    _, report = evolve(packet, QUARTIC, PropagatorConfig(0.0, 0.01), 0.1, report_every=3,
                         observers={"mean_z": lambda psi: classical_expectation(_density(psi), lambda z, p: z)})
    assert report.time == pytest.approx([0.0, 0.03, 0.06, 0.09, 0.1])
    assert report.columns() == ["time", "norm", "boundary_mass", "mean_z"]
    assert len(list(report.rows())) == 5
    with pytest.raises(ValueError):
        evolve(packet, QUARTIC, PropagatorConfig(0.0, 0.03), 0.1)


def _density(psi):
    from zwitter.state import density_from_wavefunction
    return density_from_wavefunction(psi)


def test_zero_horizon_returns_copy(packet):
    out, report = evolve(packet, QUARTIC, PropagatorConfig(), 0.0)
    assert np.array_equal(out.values, packet.values) and out.values is not packet.values
    assert report.time == []


def test_boundary_monitor(grid):
    _, psi_c = pure_state_density(gaussian_packet(grid, 0.0, 6.0))
    with pytest.raises(BoundaryMassError):
        evolve(psi_c, Potential.free(), PropagatorConfig(0.0, 1e-2), 1.0, report_every=10)


def test_invalid_config():
    with pytest.raises(ValueError):
        PropagatorConfig(gamma=2.0)
    with pytest.raises(ValueError):
        PropagatorConfig(dt=0.0)
    with pytest.raises(ValueError):
        PropagatorConfig(scheme="euler")


@pytest.mark.parametrize("gamma", [0.0, math.pi / 4, math.pi / 2])
def test_free_spreading(grid, gamma):
    """Without a potential every gamma gives free streaming: var_z(t) = var_z + t^2 var_p."""
    _, psi_c = pure_state_density(gaussian_packet(grid))
    out, _ = evolve(psi_c, Potential.free(), PropagatorConfig(gamma, 0.05), 1.0)
    w = _density(out)
    assert classical_expectation(w, lambda z, p: z ** 2) == pytest.approx(0.25 + 0.25, abs=1e-10)
    assert classical_expectation(w, lambda z, p: z * p) == pytest.approx(0.25, abs=1e-10)


@pytest.mark.parametrize("gamma", [0.0, 1.0])
def test_harmonic_quarter_period(grid, gamma):
    """Moyal and Liouville generators coincide for a quadratic potential: a rigid rotation."""
    _, psi_c = pure_state_density(gaussian_packet(grid, 2.0, 0.0))
    out, _ = evolve(psi_c, Potential.harmonic(1.0), PropagatorConfig(gamma, math.pi / 400, "yoshida4"),
                    math.pi / 2)
    w = _density(out)
    assert classical_expectation(w, lambda z, p: z) == pytest.approx(0.0, abs=1e-8)
    assert classical_expectation(w, lambda z, p: p) == pytest.approx(-2.0, abs=1e-8)


def test_liouville_oracle_on_free_flight(grid):
    w0, _ = pure_state_density(gaussian_packet(grid))
    res = liouville_characteristics(w0, Potential.free(), 1.0, 10)
    z, p = grid.mesh()
    exact = 4 * np.exp(-2 * (z - p) ** 2 - 2 * p ** 2)
    assert np.max(np.abs(res.w.values - exact)) < 1e-3
    assert res.escaped_nodes >= 0


@pytest.mark.parametrize("scheme,order", [("strang", 2), ("yoshida4", 4)])
def test_convergence_order(grid, packet, scheme, order):
    cfg = lambda dt: PropagatorConfig(math.pi / 4, dt, scheme)  # noqa: E731
    reference = evolve(packet, QUARTIC, PropagatorConfig(math.pi / 4, 1e-3, "yoshida4"), 0.4)[0].values
    errors = [np.max(np.abs(evolve(packet, QUARTIC, cfg(dt), 0.4)[0].values - reference))
              for dt in (0.04, 0.02)]
    assert math.log2(errors[0] / errors[1]) == pytest.approx(order, abs=0.3)


def test_single_step_matches_evolve(packet):
    cfg = PropagatorConfig(0.3, 0.01)
    assert np.allclose(step_zwitter(packet, QUARTIC, cfg).values, evolve(packet, QUARTIC, cfg, 0.01)[0].values)


def test_schrodinger_oracle_conserves_norm(grid):
    out = schrodinger_evolve(gaussian_packet(grid, 0.5, 0.5), QUARTIC, 0.01, 1.0)
    assert out.norm() == pytest.approx(1.0, abs=1e-12)
