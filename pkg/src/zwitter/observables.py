"""Expectation values from w, psi_C and rho_Q; operator actions; correlation prescriptions.

Operators act spectrally: ``X_Q`` multiplies by ``z - r/2`` in the (z, r)
lattice and ``P_Q`` by ``p + hbar k/2`` in the (k, p) lattice (the sign of the
``k`` term follows the ``exp(-i k z)`` forward transform, see
``docs/conventions.md``).  No finite differences are used anywhere.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import fft as sfft

from .grid import GridSpec, PhaseField, integrate_phase_space
from .operators import (Add, Expr, ExpressionError, Hamiltonian, Mul, PQ, PotentialOf, Scale, XQ,
                        block_matrices, expand)
from .transforms import CoarseDensityMatrix

__all__ = [
    "ClassicalObservable",
    "BinningScheme",
    "HermiticityError",
    "RoughnessDecomposition",
    "classical_expectation",
    "apply_XQ",
    "apply_PQ",
    "apply_expression",
    "quantum_expectation",
    "density_matrix_expectation",
    "symmetrized_moment",
    "momentum_roughness_decomposition",
    "anticommutator_correlation",
    "sequential_measurement_correlation",
    "polynomial_observable",
]

log = logging.getLogger(__name__)

IMAG_TOLERANCE = 1e-9
ROUGHNESS_FLOOR = 1e-13


class HermiticityError(ArithmeticError):
    """A Hermitian expression produced an expectation with a large imaginary part."""


@dataclass(frozen=True)
class ClassicalObservable:
    """A closed-form phase-space function ``F(z, p)``, vectorised over arrays."""

    func: Callable[[np.ndarray, np.ndarray], np.ndarray]
    description: str = ""

    def __call__(self, z, p):
        return self.func(z, p)


def polynomial_observable(coefficients: dict) -> ClassicalObservable:
    """``sum c_ab z^a p^b`` from ``{(a, b): c}``."""
    items = sorted(coefficients.items())

    def func(z, p):
        return sum(c * z ** a * p ** b for (a, b), c in items)

    text = " + ".join(f"{c!r}*z^{a}*p^{b}" for (a, b), c in items) or "0"
    return ClassicalObservable(func, text)


@dataclass(frozen=True)
class BinningScheme:
    """Half-open position bins ``[edges[i], edges[i+1])`` with representative values."""

    edges: tuple
    representatives: tuple

    def __post_init__(self):
        edges = tuple(float(e) for e in self.edges)
        reps = tuple(float(a) for a in self.representatives)
        if len(edges) < 2 or any(b <= a for a, b in zip(edges, edges[1:])):
            raise ValueError("bin edges must be strictly increasing")
        if len(reps) != len(edges) - 1 or not all(map(math.isfinite, reps)):
            raise ValueError("need one finite representative per bin")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "representatives", reps)

    @classmethod
    def uniform(cls, lo: float, hi: float, n_bins: int) -> "BinningScheme":
        """Equal bins with the bin centres as representatives."""
        edges = np.linspace(lo, hi, n_bins + 1)
        return cls(tuple(edges), tuple(0.5 * (edges[1:] + edges[:-1])))

    @classmethod
    def single(cls, lo: float = -math.inf, hi: float = math.inf, value: float = 1.0) -> "BinningScheme":
        return cls((lo, hi), (value,))

    def assign(self, x: np.ndarray) -> np.ndarray:
        """Bin index of each coordinate, -1 when outside every bin."""
        idx = np.searchsorted(np.asarray(self.edges), x, side="right") - 1
        idx[(idx < 0) | (idx >= len(self.representatives))] = -1
        return idx


def classical_expectation(w: PhaseField, F: ClassicalObservable | Callable) -> float:
    """``int F(z, p) w(z, p)`` with the phase-space measure."""
    z, p = w.grid.mesh()
    return float(np.sum(np.asarray(F(z, p)) * w.values) * w.grid.measure)


# ------------------------------------------------------- spectral actions

def _r_forward(values: np.ndarray) -> np.ndarray:
    return sfft.fftshift(sfft.fft(sfft.ifftshift(values, axes=1), axis=1), axes=1)


def _r_inverse(values: np.ndarray) -> np.ndarray:
    return sfft.fftshift(sfft.ifft(sfft.ifftshift(values, axes=1), axis=1), axes=1)


def _k_forward(values: np.ndarray) -> np.ndarray:
    return sfft.fftshift(sfft.fft(sfft.ifftshift(values, axes=0), axis=0), axes=0)


def _k_inverse(values: np.ndarray) -> np.ndarray:
    return sfft.fftshift(sfft.ifft(sfft.ifftshift(values, axes=0), axis=0), axes=0)


def _multiply_zr(values: np.ndarray, symbol: np.ndarray) -> np.ndarray:
    # the lattice measures cancel between forward and inverse transforms
    return _r_inverse(symbol * _r_forward(values))


def _multiply_kp(values: np.ndarray, symbol: np.ndarray) -> np.ndarray:
    return _k_inverse(symbol * _k_forward(values))


def _x_symbol(grid: GridSpec) -> np.ndarray:
    return grid.z[:, None] - 0.5 * grid.r[None, :]


def _p_symbol(grid: GridSpec) -> np.ndarray:
    return grid.p[None, :] + 0.5 * grid.hbar * grid.k[:, None]


def apply_XQ(field: PhaseField) -> PhaseField:
    """``X_Q f``, returned in (z, p)."""
    return field.with_values(_multiply_zr(field.values, _x_symbol(field.grid)), "zp")


def apply_PQ(field: PhaseField) -> PhaseField:
    """``P_Q f``, returned in (z, p)."""
    return field.with_values(_multiply_kp(field.values, _p_symbol(field.grid)), "zp")


def _apply_atom(node, values: np.ndarray, grid: GridSpec) -> np.ndarray:
    if node == XQ:
        return _multiply_zr(values, _x_symbol(grid))
    if node == PQ:
        return _multiply_kp(values, _p_symbol(grid))
    if isinstance(node, PotentialOf):
        return _multiply_zr(values, node.potential(_x_symbol(grid)))
    if isinstance(node, Hamiltonian):
        kinetic = _multiply_kp(values, _p_symbol(grid) ** 2 / (2 * grid.mass))
        return kinetic + _multiply_zr(values, node.potential(_x_symbol(grid)))
    raise ExpressionError(f"unsupported atom {node!r}")


def apply_expression(expr: Expr, field: PhaseField) -> PhaseField:
    """Apply an operator expression; in each monomial the rightmost factor acts first."""
    values = np.asarray(field.values, dtype=complex)
    total = np.zeros_like(values)
    for coeff, mono in expand(expr):
        out = values
        for node in reversed(mono):
            out = _apply_atom(node, out, field.grid)
        total += coeff * out
    return field.with_values(total, "zp")


def _finish(value: complex, expr: Expr) -> float:
    if abs(value.imag) > IMAG_TOLERANCE:
        if expr.is_hermitian():
            raise HermiticityError(
                f"<{expr.to_text()}> has imaginary part {value.imag:.3e} for a Hermitian expression")
        log.info("non-Hermitian %s: reporting real part, imaginary part %.3e",
                 expr.to_text(), value.imag)
    return float(value.real)


def quantum_expectation(psi_c: PhaseField, expr: Expr) -> float:
    """``int psi_C F(X_Q, P_Q) psi_C``."""
    applied = apply_expression(expr, psi_c)
    value = complex(np.vdot(psi_c.values, applied.values) * psi_c.grid.measure)
    return _finish(value, expr)


def density_matrix_expectation(rho: CoarseDensityMatrix, expr: Expr) -> float:
    """``Tr(rho_Q F)`` with the operator built on the coarse sub-lattices."""
    return _finish(rho.expectation_matrices(block_matrices(expr, rho.grid)), expr)


def symmetrized_moment(rho_w: PhaseField, F: ClassicalObservable | Callable) -> float:
    """``int F(z, p) rho_w(z, p)``."""
    return classical_expectation(rho_w, F)


@dataclass(frozen=True)
class RoughnessDecomposition:
    p_cl_sq: float
    roughness: float
    total: float
    excluded_mass: float


def momentum_roughness_decomposition(w: PhaseField, floor: float = ROUGHNESS_FLOOR) -> RoughnessDecomposition:
    """Split ``<P_Q^2>`` into the classical ``<p^2>`` and the ``(hbar^2/16) <(d_z ln w)^2>`` term.

    ``d_z w`` is spectral.  Cells where ``w < floor * max(w)`` are left out of
    the roughness sum; their probability is returned as ``excluded_mass``.
    """
    g = w.grid
    values = np.asarray(w.values, dtype=float)
    p_cl_sq = classical_expectation(w, lambda z, p: p * p)
    ik = 1j * g.k.copy()
    ik[0] = 0.0  # unpaired Nyquist mode
    dw = _k_inverse(ik[:, None] * _k_forward(values)).real
    keep = values > floor * values.max()
    roughness = g.hbar ** 2 / 16 * float(np.sum(dw[keep] ** 2 / values[keep]) * g.measure)
    excluded = float(np.sum(values[~keep]) * g.measure)
    if excluded > 0:
        log.debug("roughness floor excluded probability %.3e", excluded)
    return RoughnessDecomposition(p_cl_sq, roughness, p_cl_sq + roughness, excluded)


def anticommutator_correlation(state, A: Expr, B: Expr) -> float:
    """``<(AB + BA)/2>`` in a classical wave function or a coarse density matrix."""
    sym = Scale(0.5, Add((Mul((A, B)), Mul((B, A)))))
    if isinstance(state, CoarseDensityMatrix):
        return density_matrix_expectation(state, sym)
    return quantum_expectation(state, sym)


def sequential_measurement_correlation(rho: CoarseDensityMatrix, binning: BinningScheme,
                                       B: Expr) -> tuple[float, np.ndarray]:
    """``sum_a A_a Tr(Pi_a rho Pi_a B)`` for a sharp position measurement followed by ``B``.

    Returns the correlation and the bin probabilities ``w_a = Tr(Pi_a rho)``.
    The second measurement enters through its expectation in each branch.
    """
    mats = block_matrices(B, rho.grid)
    n_bins = len(binning.representatives)
    weights = np.zeros(n_bins)
    total = 0.0
    for parity, (op, mat) in enumerate(zip(rho.operators(), mats)):
        bins = binning.assign(rho.block_x(parity))
        for alpha, a_val in enumerate(binning.representatives):
            sel = np.flatnonzero(bins == alpha)
            if sel.size == 0:
                continue
            sub = op[np.ix_(sel, sel)]
            weights[alpha] += 0.5 * float(np.trace(sub).real)
            total += 0.5 * a_val * complex(np.sum(sub * mat[np.ix_(sel, sel)].T))
    empty = np.flatnonzero(weights < 1e-12)
    if empty.size:
        log.warning("%d of %d position bins are empty (indices %s)", empty.size, n_bins, empty.tolist())
    return _finish(complex(total), B), weights
