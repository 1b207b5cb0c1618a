"""Phase-space lattice, spectral representation changes and integration.

The (z, p) lattice is centred: ``z_j = -z_extent/2 + j*dz`` and likewise for
``p``.  The conjugate lattices are centred too, so ``r_m = (m - n_p/2)*dr``
and ``k_i = (i - n_z/2)*dk``.  Forward transforms carry the kernel
``exp(-i p r / hbar)`` (resp. ``exp(-i k z)``) and the measure of the axis
being summed; see ``docs/conventions.md`` for the full table.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft

__all__ = [
    "GridError",
    "GridSpec",
    "PhaseField",
    "make_grid",
    "admissible_p_extent",
    "to_r_representation",
    "from_r_representation",
    "to_k_representation",
    "from_k_representation",
    "integrate_phase_space",
    "inner_product",
    "dual_inner_product",
]

REPRESENTATIONS = ("zp", "zr", "kp")


class GridError(ValueError):
    """Invalid grid dimensions or mismatched grids."""


def admissible_p_extent(n_z: int, z_extent: float, hbar: float = 1.0) -> float:
    """Momentum extent for which dr = 2*dz and dr*dp = 2*pi*hbar/n_p."""
    return math.pi * hbar * n_z / z_extent


@dataclass(frozen=True)
class GridSpec:
    n_z: int
    n_p: int
    z_extent: float
    p_extent: float
    hbar: float = 1.0
    mass: float = 1.0

    @property
    def dz(self) -> float:
        return self.z_extent / self.n_z

    @property
    def dp(self) -> float:
        return self.p_extent / self.n_p

    @property
    def dr(self) -> float:
        return 2.0 * math.pi * self.hbar / (self.n_p * self.dp)

    @property
    def dk(self) -> float:
        return 2.0 * math.pi / self.z_extent

    @property
    def measure(self) -> float:
        """Cell weight dz*dp/(2*pi*hbar)."""
        return self.dz * self.dp / (2.0 * math.pi * self.hbar)

    @property
    def z(self) -> np.ndarray:
        return (np.arange(self.n_z) - self.n_z // 2) * self.dz

    @property
    def p(self) -> np.ndarray:
        return (np.arange(self.n_p) - self.n_p // 2) * self.dp

    @property
    def r(self) -> np.ndarray:
        return (np.arange(self.n_p) - self.n_p // 2) * self.dr

    @property
    def k(self) -> np.ndarray:
        return (np.arange(self.n_z) - self.n_z // 2) * self.dk

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_z, self.n_p)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.z, self.p, indexing="ij")

    def refined(self, factor: int = 2) -> "GridSpec":
        """Same box, ``factor`` times more samples on both axes."""
        return make_grid(self.n_z * factor, self.n_p * factor, self.z_extent,
                         None, self.hbar, self.mass)


def make_grid(n_z: int, n_p: int, z_extent: float, p_extent: float | None = None,
              hbar: float = 1.0, mass: float = 1.0) -> GridSpec:
    """Build a Wigner-compatible grid.

    ``p_extent=None`` selects the unique admissible value ``pi*hbar*n_z/z_extent``.
    Any other value must reproduce it to 1e-12 relative, otherwise the shifted
    points ``z +- r/2`` would fall off the lattice.
    """
    for name, n in (("n_z", n_z), ("n_p", n_p)):
        if int(n) != n or n < 8 or n % 2:
            raise GridError(f"{name} must be an even integer >= 8, got {n!r}")
    if not z_extent > 0:
        raise GridError(f"z_extent must be positive, got {z_extent!r}")
    if hbar <= 0 or mass <= 0:
        raise GridError("hbar and mass must be positive")
    want = admissible_p_extent(int(n_z), z_extent, hbar)
    if p_extent is None:
        p_extent = want
    elif not p_extent > 0:
        raise GridError(f"p_extent must be positive, got {p_extent!r}")
    elif abs(p_extent - want) > 1e-12 * want:
        raise GridError(
            f"dr = 2*dz violated: p_extent={p_extent!r} but n_z={n_z}, "
            f"z_extent={z_extent!r} require p_extent={want!r}")
    return GridSpec(int(n_z), int(n_p), float(z_extent), float(p_extent),
                    float(hbar), float(mass))


@dataclass(frozen=True)
class PhaseField:
    """Samples on one of the three lattices; ``rep`` names which one."""

    grid: GridSpec
    values: np.ndarray
    rep: str = "zp"

    def __post_init__(self):
        if self.rep not in REPRESENTATIONS:
            raise GridError(f"unknown representation {self.rep!r}")
        values = np.asarray(self.values)
        if values.shape != self.grid.shape:
            raise GridError(f"field shape {values.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "values", values)

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.values)

    def with_values(self, values: np.ndarray, rep: str | None = None) -> "PhaseField":
        return PhaseField(self.grid, values, rep or self.rep)


def _require_rep(field: PhaseField, rep: str) -> None:
    if field.rep != rep:
        raise GridError(f"expected a field in {rep!r}, got {field.rep!r}")


def _centred_dft(a: np.ndarray, axis: int, inverse: bool = False) -> np.ndarray:
    a = sfft.ifftshift(a, axes=axis)
    a = sfft.ifft(a, axis=axis) if inverse else sfft.fft(a, axis=axis)
    return sfft.fftshift(a, axes=axis)


def to_r_representation(field: PhaseField) -> PhaseField:
    """DFT along p: ``sum_l dp * f(z, p_l) * exp(-i p_l r / hbar)``."""
    _require_rep(field, "zp")
    g = field.grid
    return field.with_values(g.dp * _centred_dft(field.values, 1), "zr")


def from_r_representation(field: PhaseField) -> PhaseField:
    _require_rep(field, "zr")
    g = field.grid
    scale = g.n_p * g.dr / (2.0 * math.pi * g.hbar)
    return field.with_values(scale * _centred_dft(field.values, 1, inverse=True), "zp")


def to_k_representation(field: PhaseField) -> PhaseField:
    """DFT along z: ``sum_j dz * f(z_j, p) * exp(-i k z_j)``."""
    _require_rep(field, "zp")
    g = field.grid
    return field.with_values(g.dz * _centred_dft(field.values, 0), "kp")


def from_k_representation(field: PhaseField) -> PhaseField:
    _require_rep(field, "kp")
    g = field.grid
    return field.with_values(_centred_dft(field.values, 0, inverse=True) / g.dz, "zp")


def integrate_phase_space(field: PhaseField) -> float:
    """``sum f * dz * dp / (2 pi hbar)``; complex input returns a complex sum."""
    _require_rep(field, "zp")
    total = field.values.sum() * field.grid.measure
    return total if np.iscomplexobj(total) else float(total)


def _same_grid(f: PhaseField, g: PhaseField) -> None:
    if f.grid != g.grid:
        raise GridError("fields live on different grids")


def inner_product(f: PhaseField, g: PhaseField) -> complex | float:
    """``<f, g> = int conj(f) g`` with the phase-space measure."""
    _same_grid(f, g)
    _require_rep(f, "zp")
    _require_rep(g, "zp")
    total = np.vdot(f.values, g.values) * f.grid.measure
    if not (np.iscomplexobj(f.values) or np.iscomplexobj(g.values)):
        return float(total.real)
    return complex(total)


def dual_inner_product(f: PhaseField, g: PhaseField) -> complex:
    """The same bilinear form evaluated in the (z, r) or (k, p) lattice."""
    _same_grid(f, g)
    if f.rep != g.rep:
        raise GridError("fields are in different representations")
    grid = f.grid
    two_pi_hbar = 2.0 * math.pi * grid.hbar
    if f.rep == "zr":
        weight = grid.dz * grid.dr / two_pi_hbar ** 2
    elif f.rep == "kp":
        weight = grid.dk * grid.dp / (2.0 * math.pi * two_pi_hbar)
    else:
        weight = grid.measure
    return complex(np.vdot(f.values, g.values) * weight)
