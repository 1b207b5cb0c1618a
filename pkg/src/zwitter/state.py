"""Probability densities, classical and quantum wave functions, and spectra.

Quantum wave functions live on the z-lattice itself (``dx = dz``).  Because
``dr = 2 dz``, the shifted points ``z +- r/2`` of the Wigner sum are lattice
sites, and only pairs ``(x, x')`` with ``x - x'`` an even number of cells
enter.  States are treated as zero outside the box.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy import fft as sfft

from .grid import GridSpec, PhaseField, integrate_phase_space
from .potentials import Potential

log = logging.getLogger(__name__)

__all__ = [
    "StateError",
    "ProbabilityDensity",
    "ClassicalWaveFunction",
    "QuantumWaveFunction",
    "SpectrumSlice",
    "density_from_wavefunction",
    "wavefunction_from_density",
    "wigner_of_pure_state",
    "pure_state_density",
    "gaussian_packet",
    "double_slit_state",
    "solve_spectrum",
    "hamiltonian_matrix",
    "apply_hamiltonian",
    "boundary_mass",
]

BOUNDARY_CELLS = 5


class StateError(ValueError):
    """Invalid state, domain overflow, or failed normalisation."""


class SpectrumError(StateError):
    """Eigen-solver precondition failure or non-convergence."""


@dataclass(frozen=True)
class ProbabilityDensity(PhaseField):
    def __post_init__(self):
        super().__post_init__()
        if np.iscomplexobj(self.values):
            raise StateError("probability density must be real")
        if np.any(self.values < 0):
            raise StateError("probability density has negative samples")

    def total(self) -> float:
        return integrate_phase_space(self)


@dataclass(frozen=True)
class ClassicalWaveFunction(PhaseField):
    sign_provenance: str = "unspecified"

    def __post_init__(self):
        super().__post_init__()
        if np.iscomplexobj(self.values):
            raise StateError("classical wave function must be real")

    def norm(self) -> float:
        return math.sqrt(float(np.sum(self.values ** 2)) * self.grid.measure)


@dataclass(frozen=True)
class QuantumWaveFunction:
    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.grid.n_z,):
            raise StateError(f"wave function needs {self.grid.n_z} samples, got {values.shape}")
        object.__setattr__(self, "values", values)

    @property
    def x(self) -> np.ndarray:
        return self.grid.z

    @property
    def dx(self) -> float:
        return self.grid.dz

    def norm(self) -> float:
        return math.sqrt(float(np.sum(np.abs(self.values) ** 2)) * self.dx)

    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def momentum_amplitude(self, p: np.ndarray) -> np.ndarray:
        """``phi(p) = sum_j dx psi(x_j) exp(-i p x_j / hbar)`` at arbitrary momenta."""
        phase = np.exp(-1j * np.outer(p, self.x) / self.grid.hbar)
        return phase @ self.values * self.dx


@dataclass(frozen=True)
class SpectrumSlice:
    E0: float
    E1: float
    psi0: QuantumWaveFunction
    psi1: QuantumWaveFunction
    residuals: tuple[float, float]
    iterations: tuple[int, int]


def boundary_mass(density: np.ndarray, weight: float, cells: int = BOUNDARY_CELLS) -> float:
    """Mass within ``cells`` samples of any edge of a 1D or 2D periodic box."""
    d = np.asarray(density)
    mask = np.zeros(d.shape, dtype=bool)
    for axis in range(d.ndim):
        idx = [slice(None)] * d.ndim
        idx[axis] = np.r_[0:cells, d.shape[axis] - cells:d.shape[axis]]
        mask[tuple(idx)] = True
    return float(np.sum(d[mask])) * weight


def density_from_wavefunction(psi_c: ClassicalWaveFunction | PhaseField) -> ProbabilityDensity:
    return ProbabilityDensity(psi_c.grid, np.asarray(psi_c.values, dtype=float) ** 2)


def wavefunction_from_density(w: ProbabilityDensity, sign_rule="all_positive") -> ClassicalWaveFunction:
    """``psi_C = s * sqrt(w)``.

    ``sign_rule`` is ``"all_positive"`` or a reference field (``PhaseField`` or
    array) whose sign is inherited wherever it is nonzero.
    """
    amplitude = np.sqrt(w.values)
    if isinstance(sign_rule, str):
        if sign_rule != "all_positive":
            raise StateError(f"unknown sign rule {sign_rule!r}")
        return ClassicalWaveFunction(w.grid, amplitude, "zp", "all_positive")
    reference = np.asarray(getattr(sign_rule, "values", sign_rule), dtype=float)
    if reference.shape != w.values.shape:
        raise StateError("sign reference has the wrong shape")
    sign = np.where(reference < 0, -1.0, 1.0)
    return ClassicalWaveFunction(w.grid, sign * amplitude, "zp", "from_reference_field")


def _shift_products(psi: np.ndarray, n_p: int) -> np.ndarray:
    """``C[j, m] = psi(j + s) conj(psi(j - s))`` with ``s = m - n_p/2``, zero off the box."""
    n = psi.size
    half = n_p // 2
    padded = np.zeros(n + 2 * half + 2, dtype=complex)
    padded[half + 1:half + 1 + n] = psi
    j = np.arange(n)[:, None] + half + 1
    s = np.arange(n_p)[None, :] - half
    return padded[j + s] * np.conj(padded[j - s])


def wigner_of_pure_state(psi_q: QuantumWaveFunction) -> PhaseField:
    """``W(z, p) = sum_r dr exp(-i p r / hbar) psi(z + r/2) conj(psi(z - r/2))``.

    Unit integral and the exact position marginal hold by construction; the
    purity ``int W^2`` is one up to aliasing (see ``pure_state_density``).
    """
    g = psi_q.grid
    products = _shift_products(psi_q.values, g.n_p)
    spectrum = sfft.fftshift(sfft.fft(sfft.ifftshift(products, axes=1), axis=1), axes=1)
    return PhaseField(g, g.dr * spectrum.real)


def pure_state_density(psi_q: QuantumWaveFunction) -> tuple[ProbabilityDensity, ClassicalWaveFunction]:
    """Pure-state classical wave function (the Wigner function) and its square.

    The discrete Wigner function misses unit purity by an aliasing-sized
    amount; it is rescaled to ``int psi_C^2 = 1`` and the correction logged.
    """
    wigner = wigner_of_pure_state(psi_q)
    purity = float(np.sum(wigner.values ** 2)) * wigner.grid.measure
    if abs(purity - 1.0) > 1e-6:
        raise StateError(f"discrete purity {purity:.3e} deviates from 1 by more than 1e-6; "
                         "grid too coarse or too small for this state")
    scale = 1.0 / math.sqrt(purity)
    log.debug("pure_state_density: purity correction %.3e", scale - 1.0)
    psi_c = ClassicalWaveFunction(wigner.grid, wigner.values * scale, "zp", "wigner_function")
    return density_from_wavefunction(psi_c), psi_c


def _check_domain(psi: np.ndarray, grid: GridSpec, threshold: float = 1e-10) -> None:
    mass = boundary_mass(np.abs(psi) ** 2, grid.dz)
    if mass > threshold:
        raise StateError(f"state overflows the domain: boundary mass {mass:.2e} > {threshold:.0e}")


def _gaussian(grid: GridSpec, z0: float, p0: float, sigma: float) -> np.ndarray:
    z = grid.z
    return ((2 * math.pi * sigma ** 2) ** -0.25
            * np.exp(-((z - z0) ** 2) / (4 * sigma ** 2) + 1j * p0 * (z - z0) / grid.hbar))


def gaussian_packet(grid: GridSpec, z0: float = 0.0, p0: float = 0.0, sigma: float = math.sqrt(0.5),
                    check_domain: bool = True) -> QuantumWaveFunction:
    """Normalised Gaussian with mean position ``z0``, mean momentum ``p0``, position spread ``sigma``."""
    if not sigma > 0:
        raise StateError("sigma must be positive")
    psi = _gaussian(grid, z0, p0, sigma)
    if check_domain:
        _check_domain(psi, grid)
    return QuantumWaveFunction(grid, psi)


def double_slit_state(grid: GridSpec, separation: float, width: float, p0: float = 0.0,
                      check_domain: bool = True) -> QuantumWaveFunction:
    """Equal-weight superposition of Gaussians at ``+-separation/2`` sharing momentum ``p0``."""
    if not separation > 4 * width:
        raise StateError("slits are not resolved: need separation > 4*width")
    left = _gaussian(grid, -separation / 2, p0, width)
    right = _gaussian(grid, separation / 2, p0, width)
    overlap = math.exp(-separation ** 2 / (8 * width ** 2))
    psi = (left + right) / math.sqrt(2 * (1 + overlap))
    if check_domain:
        _check_domain(psi, grid)
    return QuantumWaveFunction(grid, psi)


def _kinetic_symbol(grid: GridSpec) -> np.ndarray:
    k = sfft.fftfreq(grid.n_z, d=grid.dz) * 2 * math.pi
    return (grid.hbar * k) ** 2 / (2 * grid.mass)


def apply_hamiltonian(psi: np.ndarray, grid: GridSpec, potential: Potential) -> np.ndarray:
    """Spectral ``H_Q psi`` on the z-lattice."""
    kinetic = sfft.ifft(_kinetic_symbol(grid) * sfft.fft(psi))
    return kinetic + potential(grid.z) * psi


def hamiltonian_matrix(grid: GridSpec, potential: Potential) -> np.ndarray:
    """Dense Fourier-grid ``H_Q`` (real symmetric)."""
    eye = np.eye(grid.n_z)
    kinetic = sfft.ifft(_kinetic_symbol(grid)[:, None] * sfft.fft(eye, axis=0), axis=0).real
    return 0.5 * (kinetic + kinetic.T) + np.diag(potential(grid.z))


def _imaginary_time(h: np.ndarray, grid: GridSpec, potential: Potential, guess: np.ndarray,
                    lower: list[np.ndarray], tol: float, tau: float, max_iter: int):
    dx = grid.dz
    shift = float(np.min(potential(grid.z))) - 1.0
    lu = scipy.linalg.lu_factor(np.eye(h.shape[0]) + tau * (h - shift * np.eye(h.shape[0])))
    psi = guess.astype(float)

    def project(v):
        for u in lower:
            v = v - u * (np.dot(u, v) * dx)
        return v / math.sqrt(np.dot(v, v) * dx)

    psi = project(psi)
    for it in range(1, max_iter + 1):
        psi = project(scipy.linalg.lu_solve(lu, psi))
        h_psi = apply_hamiltonian(psi, grid, potential).real
        energy = float(np.dot(psi, h_psi) * dx)
        residual = math.sqrt(float(np.sum((h_psi - energy * psi) ** 2)) * dx)
        if residual <= tol:
            if psi[np.argmax(np.abs(psi))] < 0:
                psi = -psi
            return energy, psi, residual, it
    raise SpectrumError(f"imaginary-time iteration did not reach residual {tol:.1e} "
                        f"in {max_iter} iterations (last {residual:.2e})")


def solve_spectrum(grid: GridSpec, potential: Potential, tol: float = 1e-8, tau: float = 50.0,
                   max_iter: int = 20000) -> SpectrumSlice:
    """Lowest two eigenpairs of ``H_Q`` by implicit imaginary-time propagation.

    Each step applies ``(1 + tau (H - s))^-1`` with ``s`` below the spectrum,
    followed by Gram-Schmidt deflation against the states already found.
    """
    if not potential.confining:
        raise SpectrumError(f"{potential.kind} potential is not confining; no bound spectrum")
    h = hamiltonian_matrix(grid, potential)
    z = grid.z
    width = grid.z_extent / 16
    guesses = (np.exp(-z ** 2 / (2 * width ** 2)), z * np.exp(-z ** 2 / (2 * width ** 2)))
    found, energies, residuals, iterations = [], [], [], []
    for guess in guesses:
        energy, psi, res, it = _imaginary_time(h, grid, potential, guess, found, tol, tau, max_iter)
        found.append(psi)
        energies.append(energy)
        residuals.append(res)
        iterations.append(it)
    for psi in found:
        _check_domain(psi, grid)
    return SpectrumSlice(energies[0], energies[1], QuantumWaveFunction(grid, found[0]),
                         QuantumWaveFunction(grid, found[1]), tuple(residuals), tuple(iterations))
