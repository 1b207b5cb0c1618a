import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from zwitter import Potential, make_grid
from zwitter.grid import PhaseField
from zwitter.observables import (BinningScheme, HermiticityError, _finish, anticommutator_correlation, apply_PQ,
                                 apply_XQ, classical_expectation, density_matrix_expectation,
                                 momentum_roughness_decomposition, polynomial_observable, quantum_expectation,
                                 sequential_measurement_correlation, symmetrized_moment)
from zwitter.operators import PQ, XQ, Hamiltonian, Mul, parse_expression, polynomial_expression
from zwitter.state import gaussian_packet, pure_state_density, solve_spectrum
from zwitter.transforms import coarse_grain, density_matrix_of_pure_state, quantum_transform, to_xy_representation

from conftest import smooth_field


@pytest.fixture(scope="module")
def grid():
    return make_grid(128, 128, 20.0)


@given(st.integers(0, 2 ** 31))
def test_commutator_is_i_hbar(seed):
    g = make_grid(64, 64, 14.0)
    # envelope 0.7 keeps the field band-limited on this grid
    f = PhaseField(g, smooth_field(g, np.random.default_rng(seed), envelope=0.7))
    comm = apply_XQ(apply_PQ(f)).values - apply_PQ(apply_XQ(f)).values
    assert np.max(np.abs(comm - 1j * g.hbar * f.values)) < 1e-10 * np.max(np.abs(f.values))


@pytest.mark.parametrize("z0,p0,sigma", [(0.0, 0.0, math.sqrt(0.5)), (1.2, -0.7, 0.6), (-0.5, 1.0, 1.1)])
def test_gaussian_moments(grid, z0, p0, sigma):
    _, psi_c = pure_state_density(gaussian_packet(grid, z0, p0, sigma))
    assert quantum_expectation(psi_c, XQ) == pytest.approx(z0, abs=1e-10)
    assert quantum_expectation(psi_c, PQ) == pytest.approx(p0, abs=1e-10)
    assert quantum_expectation(psi_c, Mul((XQ, XQ))) == pytest.approx(z0 ** 2 + sigma ** 2, abs=1e-9)
    assert quantum_expectation(psi_c, Mul((PQ, PQ))) == pytest.approx(p0 ** 2 + 1 / (4 * sigma ** 2), abs=1e-9)
    assert anticommutator_correlation(psi_c, XQ, PQ) == pytest.approx(z0 * p0, abs=1e-9)
    rho = coarse_grain(to_xy_representation(psi_c))
    assert anticommutator_correlation(rho, XQ, PQ) == pytest.approx(z0 * p0, abs=1e-8)


def test_roughness_of_harmonic_ground_state(grid):
    w, _ = pure_state_density(solve_spectrum(grid, Potential.harmonic(1.0)).psi0)
    dec = momentum_roughness_decomposition(w)
    assert (dec.p_cl_sq, dec.roughness, dec.total) == pytest.approx((0.25, 0.25, 0.5), abs=1e-6)
    assert dec.excluded_mass < 1e-10


def test_classical_expectation_of_packet(grid):
    w, _ = pure_state_density(gaussian_packet(grid, 1.0, 0.5))
    # w is a Gaussian with variances halved relative to the Wigner function
    assert classical_expectation(w, lambda z, p: z) == pytest.approx(1.0, abs=1e-10)
    assert classical_expectation(w, lambda z, p: (p - 0.5) ** 2) == pytest.approx(0.25, abs=1e-10)


def test_polynomial_paths_agree(grid):
    rng = np.random.default_rng(5)
    coeffs = {(a, b): rng.normal() for a in range(5) for b in range(5) if a + b <= 4}
    _, psi_c = pure_state_density(gaussian_packet(grid, 0.8, -0.3, 0.8))
    op = quantum_expectation(psi_c, polynomial_expression(coeffs))
    ph = symmetrized_moment(quantum_transform(psi_c), polynomial_observable(coeffs))
    assert op == pytest.approx(ph, abs=1e-8)


def test_energy_on_density_matrix_and_wave_function_agree(grid):
    pot = Potential.quartic(1.0, 0.1)
    psi = gaussian_packet(grid, 0.5, 0.3)
    _, psi_c = pure_state_density(psi)
    h = Hamiltonian(pot)
    assert density_matrix_expectation(density_matrix_of_pure_state(psi), h) == pytest.approx(
        quantum_expectation(psi_c, h), abs=1e-9)


def test_non_hermitian_reports_real_part(grid):
    _, psi_c = pure_state_density(gaussian_packet(grid))
    # <X P> = i hbar / 2 for a centred real Gaussian: the real part is zero
    assert quantum_expectation(psi_c, parse_expression("mul(XQ,PQ)")) == pytest.approx(0.0, abs=1e-10)


def test_hermitian_with_imaginary_value_raises():
    with pytest.raises(HermiticityError):
        _finish(1.0 + 1e-6j, XQ)
    assert _finish(1.0 + 1e-6j, Mul((XQ, PQ))) == 1.0


def test_binning():
    b = BinningScheme.uniform(-1, 1, 4)
    assert b.representatives == pytest.approx((-0.75, -0.25, 0.25, 0.75))
    assert list(b.assign(np.array([-2.0, -1.0, 0.0, 0.99, 1.0]))) == [-1, 0, 2, 3, -1]
    with pytest.raises(ValueError):
        BinningScheme((0.0, 0.0), (1.0,))


def test_single_bin_sequential_correlation_is_plain_expectation(grid):
    _, psi_c = pure_state_density(gaussian_packet(grid, 0.5, 0.5))
    rho = coarse_grain(to_xy_representation(psi_c))
    b = Mul((PQ, PQ))
    value, weights = sequential_measurement_correlation(rho, BinningScheme.single(), b)
    assert weights.sum() == pytest.approx(1.0, abs=1e-10)
    assert value == pytest.approx(density_matrix_expectation(rho, b), abs=1e-9)


def test_position_then_position_correlation(grid):
    """With one bin per site and B = X_Q the correlation is <X^2>."""
    _, psi_c = pure_state_density(gaussian_packet(grid, 0.3))
    rho = coarse_grain(to_xy_representation(psi_c))
    # one bin per lattice site, with the site itself as the representative
    sites = np.unique(np.concatenate([rho.block_x(0), rho.block_x(1)]))
    edges = np.concatenate([[sites[0] - 1], 0.5 * (sites[1:] + sites[:-1]), [sites[-1] + 1]])
    centres = sites
    value, _ = sequential_measurement_correlation(rho, BinningScheme(tuple(edges), tuple(centres)), XQ)
    assert value == pytest.approx(0.3 ** 2 + 0.5, abs=1e-6)


def test_empty_bins_warn_once(grid, caplog):
    _, psi_c = pure_state_density(gaussian_packet(grid))
    rho = coarse_grain(to_xy_representation(psi_c))
    with caplog.at_level("WARNING"):
        sequential_measurement_correlation(rho, BinningScheme.uniform(30, 40, 5), XQ)
    assert sum("empty" in r.message for r in caplog.records) == 1
