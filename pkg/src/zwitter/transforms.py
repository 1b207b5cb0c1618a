"""Quantum transform and the coarse-graining chain psi_C -> (x, y) -> rho_Q -> Wigner.

Lattice bookkeeping.  With ``dr = 2 dz`` the pair ``(z_j, r_m)`` maps to
``x = z - r/2`` and ``y = z + r/2``, both z-lattice sites with ``x + y`` an
even number of cells.  The (x, y) plane therefore splits into two
interleaved sub-lattices of spacing ``2 dz`` (both sites even, or both odd),
and so does the coarse density matrix.  Each block is a complete sampling of
a state band-limited to ``|p| < p_extent/2``; the physical trace, purity and
expectation values are the block averages.  Extended index ``a`` runs over
``[0, n_z + n_p)`` with ``x_a = (a - n_z/2 - n_p/2) dz`` so that every pair
reached from the box is representable; outside the box the state is zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft

from .grid import GridError, GridSpec, PhaseField, to_r_representation, from_r_representation
from .state import QuantumWaveFunction

__all__ = [
    "XYWaveFunction",
    "CoarseDensityMatrix",
    "quantum_transform",
    "to_xy_representation",
    "from_xy_representation",
    "coarse_grain",
    "wigner_of_density_matrix",
    "density_matrix_of_pure_state",
    "quantum_position_distribution",
    "classical_position_distribution",
    "write_marginal_csv",
]


def _fold_and_transform(samples: np.ndarray, offsets: np.ndarray, grid: GridSpec) -> np.ndarray:
    """``sum_d samples[:, d] exp(-i p_l d dr / hbar)`` for integer offsets ``d``.

    The kernel is n_p-periodic in ``d``, so offsets are folded onto the
    centred r-lattice before one DFT.
    """
    n_p = grid.n_p
    folded = np.zeros((samples.shape[0], n_p), dtype=complex)
    cols = (offsets + n_p // 2) % n_p
    np.add.at(folded, (slice(None), cols), samples)
    return sfft.fftshift(sfft.fft(sfft.ifftshift(folded, axes=1), axis=1), axes=1)


def quantum_transform(psi_c: PhaseField) -> PhaseField:
    """Quantum transform of a classical wave function.

    The cosine kernel is split into exponentials, which turns each of the
    ``s`` and ``s'`` integrals into a p-transform of ``psi_C``::

        rho(z, p) = Re sum_{m, m'} dr^2/(2 pi hbar)^2 exp(i p (r_m' - r_m)/hbar)
                    hat(z + r_m/2, r_m') conj(hat(z + r_m'/2, r_m))

    and the double sum is organised by the offset ``m - m'``.
    """
    g = psi_c.grid
    n_z, n_p, half = g.n_z, g.n_p, g.n_p // 2
    hat = to_r_representation(psi_c.with_values(np.asarray(psi_c.values, dtype=float))).values
    padded = np.zeros((n_z + 2 * n_p, n_p), dtype=complex)
    padded[n_p:n_p + n_z] = hat
    j = np.arange(n_z)[:, None] + n_p
    offsets = np.arange(-(n_p - 1), n_p)
    sums = np.empty((n_z, offsets.size), dtype=complex)
    for col, d in enumerate(offsets):
        mp = np.arange(max(-half, -half - d), min(half, half - d))[None, :]
        first = padded[j + mp + d, mp + half]  # hat(z + r_m/2, r_m'), m = m' + d
        second = padded[j + mp, mp + d + half]         # hat(z + r_m'/2, r_m)
        sums[:, col] = np.sum(first * np.conj(second), axis=1)
    # the phase exp(i p (r_m' - r_m)) = exp(-i p d dr)
    rho = _fold_and_transform(sums, offsets, g) * (g.dr / (2 * math.pi * g.hbar)) ** 2
    return PhaseField(g, rho.real)


@dataclass(frozen=True)
class XYWaveFunction:
    """``psi~(x, y)`` as its even-even and odd-odd sub-lattice blocks."""

    grid: GridSpec
    even: np.ndarray
    odd: np.ndarray

    @property
    def spacing(self) -> float:
        return 2.0 * self.grid.dz

    def norm_squared(self) -> float:
        cell = self.spacing ** 2
        return 0.5 * cell * float(np.sum(np.abs(self.even) ** 2) + np.sum(np.abs(self.odd) ** 2))

    def block_norms(self) -> tuple[float, float]:
        cell = self.spacing ** 2
        return (cell * float(np.sum(np.abs(self.even) ** 2)), cell * float(np.sum(np.abs(self.odd) ** 2)))

    def value(self, a: int, b: int) -> complex:
        """Entry at extended indices ``(a, b)``; zero when parities differ."""
        if (a - b) % 2:
            return 0j
        block = self.even if a % 2 == 0 else self.odd
        return complex(block[a // 2, b // 2])


def _extended_size(grid: GridSpec) -> int:
    return grid.n_z + grid.n_p


def extended_x(grid: GridSpec) -> np.ndarray:
    return (np.arange(_extended_size(grid)) - grid.n_z // 2 - grid.n_p // 2) * grid.dz


def _check_compatible(grid: GridSpec) -> None:
    if abs(grid.dr - 2 * grid.dz) > 1e-12 * grid.dz:
        raise GridError("grid is not Wigner compatible (dr != 2 dz)")


def _xy_index_maps(grid: GridSpec, parity: int):
    """For one block: z-index, centred r-index and validity mask of every (u, v)."""
    size = _extended_size(grid) // 2
    a = 2 * np.arange(size)[:, None] + parity
    b = 2 * np.arange(size)[None, :] + parity
    half = grid.n_p // 2
    j = (a + b) // 2 - half           # z array index
    m = (b - a) // 2                  # centred r index, r = y - x
    valid = (j >= 0) & (j < grid.n_z) & (m >= -half) & (m < half)
    return j, m, valid


def to_xy_representation(psi_c: PhaseField) -> XYWaveFunction:
    """``psi~(x, y) = int_p exp(i p (x - y)/hbar) psi_C((x + y)/2, p)``: a relabelling of (z, r)."""
    g = psi_c.grid
    _check_compatible(g)
    hat = to_r_representation(psi_c.with_values(np.asarray(psi_c.values, dtype=float))).values
    hat = hat / (2 * math.pi * g.hbar)
    blocks = []
    for parity in (0, 1):
        j, m, valid = _xy_index_maps(g, parity)
        block = np.zeros(j.shape, dtype=complex)
        block[valid] = hat[j[valid], m[valid] + g.n_p // 2]
        blocks.append(block)
    return XYWaveFunction(g, *blocks)


def from_xy_representation(xy: XYWaveFunction) -> PhaseField:
    """Inverse relabelling back to the real (z, p) field."""
    g = xy.grid
    hat = np.zeros(g.shape, dtype=complex)
    for parity, block in ((0, xy.even), (1, xy.odd)):
        j, m, valid = _xy_index_maps(g, parity)
        hat[j[valid], m[valid] + g.n_p // 2] = block[valid]
    field = from_r_representation(PhaseField(g, hat * (2 * math.pi * g.hbar), "zr"))
    return field.with_values(field.values.real)


@dataclass(frozen=True)
class CoarseDensityMatrix:
    """``rho_Q(x, x')`` on the two sub-lattices (kernel values, spacing ``dx``)."""

    grid: GridSpec
    even: np.ndarray
    odd: np.ndarray

    @property
    def dx(self) -> float:
        return 2.0 * self.grid.dz

    @property
    def blocks(self) -> tuple[np.ndarray, np.ndarray]:
        return (self.even, self.odd)

    def block_x(self, parity: int) -> np.ndarray:
        return extended_x(self.grid)[parity::2]

    def operators(self) -> tuple[np.ndarray, np.ndarray]:
        """Blocks as matrices acting on samples (kernel times ``dx``)."""
        return (self.even * self.dx, self.odd * self.dx)

    def trace(self) -> float:
        return 0.5 * sum(float(np.trace(op).real) for op in self.operators())

    def block_traces(self) -> tuple[float, float]:
        return tuple(float(np.trace(op).real) for op in self.operators())

    def purity(self) -> float:
        return 0.5 * sum(float(np.sum(np.abs(op) ** 2)) for op in self.operators())

    def hermiticity_error(self) -> float:
        return max(float(np.max(np.abs(b - b.conj().T))) for b in self.blocks)

    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues of both blocks, each weighted by 1/2."""
        vals = [np.linalg.eigvalsh(0.5 * (op + op.conj().T)) for op in self.operators()]
        return 0.5 * np.concatenate(vals)

    def min_eigenvalue(self) -> float:
        return float(min(np.linalg.eigvalsh(0.5 * (op + op.conj().T))[0] for op in self.operators()))

    def expectation_matrices(self, matrices) -> float:
        """``Tr(rho O)`` averaged over blocks; ``matrices`` is ``(O_even, O_odd)``."""
        total = sum(np.trace(op @ mat) for op, mat in zip(self.operators(), matrices))
        return 0.5 * complex(total)

    def fidelity(self, psi_q: QuantumWaveFunction) -> float:
        """``<psi| rho |psi>`` averaged over the two sub-lattice samplings of ``psi``."""
        ext = self._embed(psi_q.values)
        vals = []
        for parity, op in zip((0, 1), self.operators()):
            v = ext[parity::2]
            vals.append(float((np.vdot(v, op @ v) * self.dx).real))
        return 0.5 * sum(vals)

    def _embed(self, psi: np.ndarray) -> np.ndarray:
        ext = np.zeros(_extended_size(self.grid), dtype=complex)
        start = self.grid.n_p // 2
        ext[start:start + self.grid.n_z] = psi
        return ext

    def __add__(self, other: "CoarseDensityMatrix") -> "CoarseDensityMatrix":
        return CoarseDensityMatrix(self.grid, self.even + other.even, self.odd + other.odd)

    def scaled(self, factor: float) -> "CoarseDensityMatrix":
        return CoarseDensityMatrix(self.grid, self.even * factor, self.odd * factor)


def coarse_grain(xy: XYWaveFunction) -> CoarseDensityMatrix:
    """Subtrace over y: ``rho_Q(x, x') = sum_y psi~(x, y) conj(psi~(x', y)) dy``.

    The four-index classical density matrix is never formed.
    """
    dy = xy.spacing
    return CoarseDensityMatrix(xy.grid, (xy.even @ xy.even.conj().T) * dy,
                               (xy.odd @ xy.odd.conj().T) * dy)


def density_matrix_of_pure_state(psi_q: QuantumWaveFunction) -> CoarseDensityMatrix:
    """``psi(x) conj(psi(x'))`` placed on the two sub-lattices."""
    g = psi_q.grid
    dummy = CoarseDensityMatrix(g, np.zeros((1, 1)), np.zeros((1, 1)))
    ext = dummy._embed(psi_q.values)
    e, o = ext[0::2], ext[1::2]
    return CoarseDensityMatrix(g, np.outer(e, e.conj()), np.outer(o, o.conj()))


def wigner_of_density_matrix(rho: CoarseDensityMatrix) -> PhaseField:
    """``rho_w(z, p) = sum_u du exp(-i p u / hbar) rho_Q(z + u/2, z - u/2)`` with ``du = 2 dz``."""
    g = rho.grid
    size = _extended_size(g)
    full = np.zeros((size, size), dtype=complex)
    full[0::2, 0::2] = rho.even
    full[1::2, 1::2] = rho.odd
    half_k = size // 2
    ks = np.arange(-half_k, half_k + 1)
    a = np.arange(g.n_z)[:, None] + g.n_p // 2 + ks[None, :]
    b = np.arange(g.n_z)[:, None] + g.n_p // 2 - ks[None, :]
    ok = (a >= 0) & (a < size) & (b >= 0) & (b < size)
    samples = np.zeros(a.shape, dtype=complex)
    samples[ok] = full[a[ok], b[ok]]
    wigner = _fold_and_transform(samples, ks, g) * g.dr
    return PhaseField(g, wigner.real)


def _marginal(field: PhaseField) -> tuple[np.ndarray, np.ndarray]:
    g = field.grid
    return g.z, np.asarray(field.values, dtype=float).sum(axis=1) * g.dp / (2 * math.pi * g.hbar)


def quantum_position_distribution(rho_w: PhaseField) -> tuple[np.ndarray, np.ndarray]:
    """``int_p rho_w(z, p)``; not clipped, so discretisation noise may be slightly negative."""
    return _marginal(rho_w)


def classical_position_distribution(w: PhaseField) -> tuple[np.ndarray, np.ndarray]:
    """``int_p w(z, p)``."""
    return _marginal(w)


def write_marginal_csv(path, z: np.ndarray, density: np.ndarray) -> None:
    np.savetxt(path, np.column_stack([z, density]), delimiter=",",
               header="z,probability_density", comments="")
