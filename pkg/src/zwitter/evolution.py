"""Split-step propagation of classical wave functions and the two reference solvers.

The zwitter generator splits into a kinetic part, diagonal in (k, p) with
phase ``k p / m``, and a potential part, diagonal in (z, r) with phase

    Phi_gamma(z, r) = cos^2(gamma) [V(z - r/2) - V(z + r/2)] / hbar
                      - sin^2(gamma) V'(z) r / hbar.

Both phases are odd under ``(k, r) -> (-k, -r)``, so every substep maps a
real field to a real field.  The fast path exploits this with real FFTs on
the unshifted lattice: only the non-negative half spectrum is stored, and
the unpaired Nyquist coefficient is left untouched.  Each substep is then an
exactly orthogonal real map.  ``PropagatorConfig(check_reality=True)`` runs
the literal complex-FFT recipe instead and checks the discarded imaginary
residue.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable, Mapping

import numpy as np
from scipy import fft as sfft
from scipy import ndimage

from .grid import GridSpec, PhaseField
from .potentials import Potential, max_phase_rate
from .state import (BOUNDARY_CELLS, ClassicalWaveFunction, ProbabilityDensity, QuantumWaveFunction,
                    StateError, density_from_wavefunction, wavefunction_from_density)

__all__ = [
    "PropagatorConfig",
    "EvolutionReport",
    "BoundaryMassError",
    "RealityError",
    "ZwitterPropagator",
    "SchrodingerPropagator",
    "step_zwitter",
    "evolve",
    "step_density",
    "schrodinger_step",
    "schrodinger_evolve",
    "liouville_characteristics",
    "suggest_dt",
    "potential_phase",
]

log = logging.getLogger(__name__)

SCHEMES = ("strang", "yoshida4")
REALITY_TOLERANCE = 1e-9

# Triple-jump weights of the fourth-order composition of Strang steps.
_W1 = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
_W0 = 1.0 - 2.0 * _W1


class BoundaryMassError(StateError):
    """Probability reached the edge of the box beyond the configured threshold."""


class RealityError(ArithmeticError):
    """A real-to-real substep produced an imaginary residue (convention bug)."""


@dataclass(frozen=True)
class PropagatorConfig:
    gamma: float = 0.0
    dt: float = 1e-3
    scheme: str = "strang"
    boundary_monitor_threshold: float = 1e-10
    check_reality: bool = False

    def __post_init__(self):
        if not 0.0 <= self.gamma <= math.pi / 2 + 1e-12:
            raise ValueError(f"gamma must lie in [0, pi/2], got {self.gamma!r}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")


def _substeps(scheme: str) -> tuple[list[float], list[float]]:
    """Kinetic fractions ``k_0..k_s`` and potential fractions ``v_1..v_s`` of one step."""
    if scheme == "strang":
        return [0.5, 0.5], [1.0]
    return [_W1 / 2, (_W1 + _W0) / 2, (_W0 + _W1) / 2, _W1 / 2], [_W1, _W0, _W1]


def potential_phase(grid: GridSpec, potential: Potential, gamma: float, r: np.ndarray) -> np.ndarray:
    """``Phi_gamma(z, r)`` on the z-lattice times the given r values."""
    z = grid.z[:, None]
    r = np.asarray(r)[None, :]
    c2, s2 = math.cos(gamma) ** 2, math.sin(gamma) ** 2
    moyal = potential(z - r / 2) - potential(z + r / 2) if c2 else 0.0
    liouville = -potential.derivative(z) * r if s2 else 0.0
    return (c2 * moyal + s2 * liouville) / grid.hbar


def suggest_dt(grid: GridSpec, potential: Potential, gamma: float, max_phase: float = 0.5) -> float:
    """Step keeping ``max |Phi_gamma| dt`` below ``max_phase`` radians."""
    rate = max_phase_rate(potential, grid.z, grid.r, gamma, grid.hbar, grid.z_extent / 2)
    return max_phase / rate if rate > 0 else 0.1


class ZwitterPropagator:
    """Precomputed phase tables for one grid, potential and configuration."""

    def __init__(self, grid: GridSpec, potential: Potential, cfg: PropagatorConfig):
        self.grid, self.potential, self.cfg = grid, potential, cfg
        self.kinetic_fracs, self.potential_fracs = _substeps(cfg.scheme)
        # half spectra on the unshifted lattice; offsets cancel between fft and ifft
        self._k = 2 * math.pi * sfft.rfftfreq(grid.n_z, d=grid.dz)
        self._r = 2 * math.pi * grid.hbar * sfft.rfftfreq(grid.n_p, d=grid.dp)
        self._kin_rate = self._k[:, None] * grid.p[None, :] / grid.mass
        self._pot_rate = potential_phase(grid, potential, cfg.gamma, self._r)
        self._kin_rate[-1, :] = 0.0  # Nyquist rows are left unchanged
        self._pot_rate[:, -1] = 0.0
        self._tables: dict = {}

    def _table(self, kind: str, frac: float) -> np.ndarray:
        key = (kind, round(frac, 15))
        if key not in self._tables:
            rate = self._kin_rate if kind == "K" else self._pot_rate
            self._tables[key] = np.exp(-1j * frac * self.cfg.dt * rate)
        return self._tables[key]

    def _kinetic(self, psi: np.ndarray, frac: float) -> np.ndarray:
        spec = sfft.rfft(psi, axis=0)
        spec *= self._table("K", frac)
        return sfft.irfft(spec, n=self.grid.n_z, axis=0)

    def _potential(self, psi: np.ndarray, frac: float) -> np.ndarray:
        spec = sfft.rfft(psi, axis=1)
        spec *= self._table("V", frac)
        return sfft.irfft(spec, n=self.grid.n_p, axis=1)

    def run(self, psi: np.ndarray, n_steps: int) -> np.ndarray:
        """``n_steps`` steps with the trailing and leading kinetic halves fused."""
        if n_steps <= 0:
            return psi
        if self.cfg.check_reality:
            for _ in range(n_steps):
                psi = self._complex_step(psi)
            return psi
        kf, vf = self.kinetic_fracs, self.potential_fracs
        psi = self._kinetic(psi, kf[0])
        for step in range(n_steps):
            for i, v in enumerate(vf):
                psi = self._potential(psi, v)
                last = i == len(vf) - 1
                if not last:
                    psi = self._kinetic(psi, kf[i + 1])
                elif step < n_steps - 1:
                    psi = self._kinetic(psi, kf[-1] + kf[0])
                else:
                    psi = self._kinetic(psi, kf[-1])
        return psi

    def _complex_step(self, psi: np.ndarray) -> np.ndarray:
        """One step through full complex FFTs with the centred symbols; checks reality."""
        g = self.grid
        kin = g.k[:, None] * g.p[None, :] / g.mass
        pot = potential_phase(g, self.potential, self.cfg.gamma, g.r)
        out = psi.astype(complex)
        kf, vf = self.kinetic_fracs, self.potential_fracs
        for i, frac in enumerate(kf):
            spec = sfft.fftshift(sfft.fft(sfft.ifftshift(out, axes=0), axis=0), axes=0)
            spec *= np.exp(-1j * frac * self.cfg.dt * kin)
            out = sfft.fftshift(sfft.ifft(sfft.ifftshift(spec, axes=0), axis=0), axes=0)
            if i < len(vf):
                spec = sfft.fftshift(sfft.fft(sfft.ifftshift(out, axes=1), axis=1), axes=1)
                spec *= np.exp(-1j * vf[i] * self.cfg.dt * pot)
                out = sfft.fftshift(sfft.ifft(sfft.ifftshift(spec, axes=1), axis=1), axes=1)
        residue = float(np.max(np.abs(out.imag)))
        if residue > REALITY_TOLERANCE:
            raise RealityError(f"imaginary residue {residue:.3e} after a real-to-real step")
        return out.real


@lru_cache(maxsize=16)
def _propagator(grid: GridSpec, potential: Potential, cfg: PropagatorConfig) -> ZwitterPropagator:
    return ZwitterPropagator(grid, potential, cfg)


def _edge_mass(values: np.ndarray, grid: GridSpec) -> float:
    c = BOUNDARY_CELLS
    w = values * values
    rows = w[:c].sum() + w[-c:].sum()
    cols = w[c:-c, :c].sum() + w[c:-c, -c:].sum()
    return float(rows + cols) * grid.measure


def _check_boundary(values: np.ndarray, grid: GridSpec, cfg: PropagatorConfig, time: float) -> float:
    mass = _edge_mass(values, grid)
    if mass > cfg.boundary_monitor_threshold:
        raise BoundaryMassError(
            f"boundary mass {mass:.3e} exceeds {cfg.boundary_monitor_threshold:.1e} at t={time:.6g}")
    return mass


def step_zwitter(psi_c: PhaseField, potential: Potential, cfg: PropagatorConfig) -> ClassicalWaveFunction:
    """One step of ``exp(-dt L_gamma)``."""
    prop = _propagator(psi_c.grid, potential, cfg)
    out = prop.run(np.asarray(psi_c.values, dtype=float), 1)
    _check_boundary(out, psi_c.grid, cfg, cfg.dt)
    return ClassicalWaveFunction(psi_c.grid, out, sign_provenance=getattr(psi_c, "sign_provenance", "evolved"))


@dataclass
class EvolutionReport:
    """Diagnostics sampled at the report cadence (the initial state is row 0)."""

    time: list = field(default_factory=list)
    norm: list = field(default_factory=list)
    boundary_mass: list = field(default_factory=list)
    observables: dict = field(default_factory=dict)

    def record(self, t: float, psi: PhaseField, observers: Mapping[str, Callable]) -> None:
        values = np.asarray(psi.values)
        self.time.append(t)
        self.norm.append(math.sqrt(float(np.sum(values * values)) * psi.grid.measure))
        self.boundary_mass.append(_edge_mass(values, psi.grid))
        for name, fn in observers.items():
            self.observables.setdefault(name, []).append(float(fn(psi)))

    def columns(self) -> list[str]:
        return ["time", "norm", "boundary_mass", *self.observables]

    def rows(self):
        for i, t in enumerate(self.time):
            yield [t, self.norm[i], self.boundary_mass[i], *(v[i] for v in self.observables.values())]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.columns())
            for row in self.rows():
                writer.writerow([repr(float(x)) for x in row])


def _step_count(T: float, dt: float) -> int:
    n = T / dt
    steps = int(round(n))
    if abs(n - steps) > 1e-9 * max(1.0, n):
        raise ValueError(f"horizon {T!r} is not an integer number of steps of {dt!r}")
    return steps


def evolve(psi_c: PhaseField, potential: Potential, cfg: PropagatorConfig, T: float,
           observers: Mapping[str, Callable] | None = None, report_every: int = 1,
           snapshot_every: int = 0, snapshot_dir=None) -> tuple[ClassicalWaveFunction, EvolutionReport]:
    """Evolve for time ``T``; diagnostics every ``report_every`` steps.

    The boundary monitor runs at every report row and on the final state.
    ``snapshot_every > 0`` writes ``psi_c_<step>.zwit`` files to ``snapshot_dir``.
    """
    if T < 0:
        raise ValueError("T must be non-negative")
    n_steps = _step_count(T, cfg.dt)
    observers = dict(observers or {})
    report = EvolutionReport()
    grid = psi_c.grid
    provenance = getattr(psi_c, "sign_provenance", "evolved")
    psi = np.asarray(psi_c.values, dtype=float)
    if n_steps == 0:
        return ClassicalWaveFunction(grid, psi.copy(), sign_provenance=provenance), report
    prop = _propagator(grid, potential, cfg)
    report_every = max(1, int(report_every))
    cadence = report_every if not snapshot_every else math.gcd(report_every, int(snapshot_every))
    if snapshot_every:
        from .snapshot import write_snapshot
        Path(snapshot_dir).mkdir(parents=True, exist_ok=True)
    report.record(0.0, ClassicalWaveFunction(grid, psi, sign_provenance=provenance), observers)
    done = 0
    while done < n_steps:
        chunk = min(cadence - done % cadence, n_steps - done)
        psi = prop.run(psi, chunk)
        done += chunk
        t = done * cfg.dt
        if done % report_every == 0 or done == n_steps:
            _check_boundary(psi, grid, cfg, t)
            report.record(t, ClassicalWaveFunction(grid, psi, sign_provenance=provenance), observers)
        if snapshot_every and done % snapshot_every == 0:
            write_snapshot(Path(snapshot_dir) / f"psi_c_{done:06d}.zwit", PhaseField(grid, psi))
    return ClassicalWaveFunction(grid, psi, sign_provenance=provenance), report


def step_density(w: ProbabilityDensity, potential: Potential, cfg: PropagatorConfig,
                 sign_rule="all_positive") -> ProbabilityDensity:
    """``w -> w`` through the square-root lift, one wave-function step and squaring."""
    psi = wavefunction_from_density(w, sign_rule)
    return density_from_wavefunction(step_zwitter(psi, potential, cfg))


# ------------------------------------------------------------------ oracles

class SchrodingerPropagator:
    """Strang split-step for ``i hbar d_t psi = H_Q psi`` on the z-lattice."""

    def __init__(self, grid: GridSpec, potential: Potential, dt: float):
        self.grid, self.dt = grid, dt
        k = 2 * math.pi * sfft.fftfreq(grid.n_z, d=grid.dz)
        self._kin = np.exp(-1j * dt * grid.hbar * k ** 2 / (2 * grid.mass))
        v = potential(grid.z)
        self._half = np.exp(-0.5j * dt * v / grid.hbar)
        self._full = self._half * self._half

    def run(self, psi: np.ndarray, n_steps: int) -> np.ndarray:
        if n_steps <= 0:
            return psi
        psi = self._half * psi
        for step in range(n_steps):
            psi = sfft.ifft(self._kin * sfft.fft(psi))
            psi = (self._full if step < n_steps - 1 else self._half) * psi
        return psi


def _check_psi_boundary(psi: np.ndarray, grid: GridSpec, threshold: float) -> None:
    mass = float(np.sum(np.abs(psi[:BOUNDARY_CELLS]) ** 2) + np.sum(np.abs(psi[-BOUNDARY_CELLS:]) ** 2))
    if mass * grid.dz > threshold:
        raise BoundaryMassError(f"quantum boundary mass {mass * grid.dz:.3e} exceeds {threshold:.1e}")


def schrodinger_step(psi_q: QuantumWaveFunction, potential: Potential, dt: float,
                     threshold: float = 1e-10) -> QuantumWaveFunction:
    out = SchrodingerPropagator(psi_q.grid, potential, dt).run(psi_q.values, 1)
    _check_psi_boundary(out, psi_q.grid, threshold)
    return QuantumWaveFunction(psi_q.grid, out)


def schrodinger_evolve(psi_q: QuantumWaveFunction, potential: Potential, dt: float, T: float,
                       threshold: float = 1e-10) -> QuantumWaveFunction:
    out = SchrodingerPropagator(psi_q.grid, potential, dt).run(psi_q.values, _step_count(T, dt))
    _check_psi_boundary(out, psi_q.grid, threshold)
    return QuantumWaveFunction(psi_q.grid, out)


@dataclass(frozen=True)
class LiouvilleResult:
    w: ProbabilityDensity
    renormalization: float
    escaped_nodes: int


def liouville_characteristics(w0: PhaseField, potential: Potential, T: float,
                              substeps: int) -> LiouvilleResult:
    """Transport ``w0`` along Newtonian trajectories for time ``T``.

    Every node is traced backward with velocity-Verlet leapfrog and ``w0`` is
    read at the foot point through a periodic cubic spline.  Foot points
    outside the box contribute zero and are counted.
    """
    g = w0.grid
    z, p = g.mesh()
    h = -T / substeps
    m = g.mass
    force = lambda x: -potential.derivative(x)  # noqa: E731
    for _ in range(substeps):
        p = p + 0.5 * h * force(z)
        z = z + h * p / m
        p = p + 0.5 * h * force(z)
    zi = (z - g.z[0]) / g.dz
    pi = (p - g.p[0]) / g.dp
    outside = (zi < 0) | (zi > g.n_z - 1) | (pi < 0) | (pi > g.n_p - 1)
    coeffs = ndimage.spline_filter(np.asarray(w0.values, dtype=float), order=3, mode="grid-wrap")
    values = ndimage.map_coordinates(coeffs, [zi.ravel(), pi.ravel()], order=3, mode="grid-wrap",
                                     prefilter=False).reshape(g.shape)
    values[outside] = 0.0
    values = np.clip(values, 0.0, None)
    total = float(values.sum() * g.measure)
    source = float(np.sum(w0.values) * g.measure)
    factor = source / total
    return LiouvilleResult(ProbabilityDensity(g, values * factor), factor, int(outside.sum()))
