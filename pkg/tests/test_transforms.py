import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from zwitter import make_grid
from zwitter.evolution import PropagatorConfig, evolve
from zwitter.experiments.checks import brute_force_quantum_transform
from zwitter.grid import PhaseField, integrate_phase_space
from zwitter.potentials import Potential
from zwitter.state import double_slit_state, gaussian_packet, pure_state_density, wigner_of_pure_state
from zwitter.transforms import (CoarseDensityMatrix, classical_position_distribution, coarse_grain,
                                density_matrix_of_pure_state, extended_x, from_xy_representation,
                                quantum_position_distribution, quantum_transform, to_xy_representation,
                                wigner_of_density_matrix, write_marginal_csv)

from conftest import smooth_field


def test_spectral_transform_matches_brute_force():
    g = make_grid(12, 12, 6.0)
    rng = np.random.default_rng(3)
    f = PhaseField(g, rng.normal(size=g.shape))
    assert np.max(np.abs(quantum_transform(f).values - brute_force_quantum_transform(f))) < 1e-8


def test_pure_state_transform_is_the_wigner_function(grid64):
    psi = gaussian_packet(grid64, 0.5, 0.5)
    _, psi_c = pure_state_density(psi)
    assert np.max(np.abs(quantum_transform(psi_c).values - wigner_of_pure_state(psi).values)) < 1e-10


@given(st.integers(0, 2 ** 31))
def test_chain_equals_direct_transform(seed):
    g = make_grid(32, 32, 10.0)
    f = PhaseField(g, smooth_field(g, np.random.default_rng(seed)))
    chain = wigner_of_density_matrix(coarse_grain(to_xy_representation(f))).values
    assert np.max(np.abs(chain - quantum_transform(f).values)) < 1e-9


@given(st.integers(0, 2 ** 31))
def test_xy_round_trip(seed):
    g = make_grid(16, 24, 6.0)
    f = PhaseField(g, np.random.default_rng(seed).normal(size=g.shape))
    assert np.max(np.abs(from_xy_representation(to_xy_representation(f)).values - f.values)) < 1e-12


@given(st.integers(0, 2 ** 31))
def test_coarse_density_matrix_is_a_state(seed):
    # the box must hold the field in both z and p, otherwise truncation breaks the trace identity
    g = make_grid(64, 64, 14.0)
    f = smooth_field(g, np.random.default_rng(seed))
    f /= math.sqrt(np.sum(f ** 2) * g.measure)
    rho = coarse_grain(to_xy_representation(PhaseField(g, f)))
    assert rho.hermiticity_error() < 1e-12
    assert rho.min_eigenvalue() > -1e-12
    assert rho.trace() == pytest.approx(integrate_phase_space(quantum_transform(PhaseField(g, f))), abs=1e-8)
    assert rho.purity() <= 1 + 1e-10


def test_pure_state_round_trip_fidelity(grid128):
    psi = double_slit_state(grid128, 4.0, 0.5)
    _, psi_c = pure_state_density(psi)
    rho = coarse_grain(to_xy_representation(psi_c))
    assert rho.fidelity(psi) > 1 - 1e-8
    assert rho.purity() == pytest.approx(1.0, abs=1e-8)
    direct = density_matrix_of_pure_state(psi)
    assert max(np.max(np.abs(a - b)) for a, b in zip(rho.blocks, direct.blocks)) < 1e-10


def test_evolved_state_density_matrix_properties():
    g = make_grid(96, 96, 16.0)
    _, psi_c = pure_state_density(gaussian_packet(g, 0.5))
    out, _ = evolve(psi_c, Potential.quartic(), PropagatorConfig(0.6, 2e-3), 0.5)
    rho = coarse_grain(to_xy_representation(out))
    assert rho.trace() == pytest.approx(1.0, abs=1e-9)
    assert rho.min_eigenvalue() > -1e-12
    assert rho.purity() < 1.0


def test_extended_lattice_contains_box(grid64):
    x = extended_x(grid64)
    assert x.size == grid64.n_z + grid64.n_p
    assert np.isin(np.round(grid64.z / grid64.dz), np.round(x / grid64.dz)).all()


def test_marginals_and_csv(tmp_path, grid64):
    psi = gaussian_packet(grid64, 1.0)
    w, psi_c = pure_state_density(psi)
    z, q = quantum_position_distribution(quantum_transform(psi_c))
    assert np.allclose(q, psi.density(), atol=1e-10)
    _, c = classical_position_distribution(w)
    assert np.sum(c) * grid64.dz == pytest.approx(1.0, abs=1e-10)
    path = tmp_path / "m.csv"
    write_marginal_csv(path, z, q)
    lines = path.read_text().splitlines()
    assert lines[0] == "z,probability_density" and len(lines) == grid64.n_z + 1


def test_density_matrix_arithmetic(grid64):
    a = density_matrix_of_pure_state(gaussian_packet(grid64, -1.0))
    b = density_matrix_of_pure_state(gaussian_packet(grid64, 1.0))
    mix = (a + b).scaled(0.5)
    assert isinstance(mix, CoarseDensityMatrix)
    assert mix.trace() == pytest.approx(1.0, abs=1e-10)
    # overlap of the two packets is exp(-1)
    assert mix.purity() == pytest.approx(0.5 + 0.5 * math.exp(-2), abs=1e-8)
