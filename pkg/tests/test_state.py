import math

import numpy as np
import pytest
from scipy import linalg

from zwitter import Potential, make_grid
from zwitter.grid import PhaseField
from zwitter.state import (ClassicalWaveFunction, ProbabilityDensity, QuantumWaveFunction, SpectrumError,
                           StateError, boundary_mass, density_from_wavefunction, double_slit_state,
                           gaussian_packet, hamiltonian_matrix, pure_state_density, solve_spectrum,
                           wavefunction_from_density, wigner_of_pure_state)

from conftest import gaussian_wigner


def test_gaussian_packet_normalised(grid64):
    psi = gaussian_packet(grid64, 1.0, 0.5, 0.8)
    assert psi.norm() == pytest.approx(1.0, abs=1e-12)


def test_packet_leaving_the_box_is_rejected(grid64):
    with pytest.raises(StateError, match="overflows"):
        gaussian_packet(grid64, 7.5)


def test_wigner_of_gaussian_matches_closed_form(grid64):
    psi = gaussian_packet(grid64, 0.7, -0.4, 0.6)
    w = wigner_of_pure_state(psi).values
    assert np.max(np.abs(w - gaussian_wigner(grid64, 0.7, -0.4, 0.6))) < 1e-10


def test_pure_state_density_has_unit_purity(grid64):
    w, psi_c = pure_state_density(double_slit_state(grid64, 3.0, 0.5))
    assert psi_c.norm() == pytest.approx(1.0, abs=1e-12)
    assert w.total() == pytest.approx(1.0, abs=1e-12)
    assert psi_c.sign_provenance == "wigner_function"
    assert np.all(w.values >= 0)


def test_coarse_grid_purity_failure():
    g = make_grid(16, 16, 4.0)
    with pytest.raises(StateError):
        pure_state_density(QuantumWaveFunction(g, np.exp(-g.z ** 2 / 0.01) + 0j))


def test_density_and_wavefunction_round_trip(grid64):
    w = ProbabilityDensity(grid64, gaussian_wigner(grid64) ** 2 / np.sum(gaussian_wigner(grid64) ** 2) / grid64.measure)
    psi = wavefunction_from_density(w)
    assert np.all(psi.values >= 0)
    assert np.allclose(density_from_wavefunction(psi).values, w.values)


def test_negative_density_rejected(grid64):
    with pytest.raises(StateError):
        ProbabilityDensity(grid64, -np.ones(grid64.shape))
    with pytest.raises(StateError):
        ClassicalWaveFunction(grid64, np.ones(grid64.shape, dtype=complex))


def test_boundary_mass_counts_edges():
    d = np.zeros(20)
    d[0] = d[-1] = 1.0
    assert boundary_mass(d, 0.5) == pytest.approx(1.0)


def test_harmonic_spectrum_analytic():
    g = make_grid(96, 96, 14.0)
    s = solve_spectrum(g, Potential.harmonic(1.0))
    assert s.E0 == pytest.approx(0.5, abs=1e-9)
    assert s.E1 == pytest.approx(1.5, abs=1e-9)
    ground = np.pi ** -0.25 * np.exp(-g.z ** 2 / 2)
    assert np.max(np.abs(s.psi0.values - ground)) < 1e-7


def test_spectrum_matches_dense_eigh():
    g = make_grid(64, 64, 8.0)
    pot = Potential.double_well(1.0, 4.0)
    s = solve_spectrum(g, pot, tol=1e-10)
    dense = linalg.eigh(hamiltonian_matrix(g, pot), eigvals_only=True)
    assert s.E0 == pytest.approx(dense[0], abs=1e-10)
    assert s.E1 == pytest.approx(dense[1], abs=1e-10)
    overlap = abs(np.vdot(s.psi0.values, s.psi1.values)) * g.dz
    assert overlap < 1e-10


def test_spectrum_needs_confinement(grid64):
    with pytest.raises(SpectrumError):
        solve_spectrum(grid64, Potential.free())


def test_double_slit_needs_resolved_slits(grid64):
    with pytest.raises(StateError):
        double_slit_state(grid64, 1.0, 0.5)
