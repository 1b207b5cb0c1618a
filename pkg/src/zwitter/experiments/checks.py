"""Cross-module acceptance checks, grouped into suites for ``validate``.

Every check returns :class:`CheckResult` rows holding the measured value,
the threshold and the verdict.  Failures are rows, never exceptions, so a
suite always produces a complete report.  Expensive default-resolution runs
are cached so the self-convergence suite can reuse them.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np

from ..evolution import (PropagatorConfig, ZwitterPropagator, _edge_mass, evolve,
                         liouville_characteristics, schrodinger_evolve)
from ..grid import PhaseField, make_grid
from ..observables import (apply_PQ, apply_XQ, momentum_roughness_decomposition,
                           quantum_expectation, symmetrized_moment)
from ..operators import Hamiltonian, Mul, PQ, polynomial_expression
from ..potentials import Potential
from ..state import (double_slit_state, gaussian_packet, pure_state_density, solve_spectrum,
                     wigner_of_pure_state)
from ..transforms import (coarse_grain, quantum_transform, to_xy_representation,
                          wigner_of_density_matrix)
from .doubleslit import ENVELOPE_CONFIG, FREE_CONFIG, run_double_slit, schrodinger_profile
from .spectroscopy import FitError, run_double_well_proximity, scan_gamma

__all__ = ["CheckResult", "SUITES", "validate", "brute_force_quantum_transform", "run_suite"]

QUARTIC = Potential.quartic(1.0, 0.1)
HARMONIC = Potential.harmonic(1.0)
DOUBLE_WELL = Potential.double_well(1.0, 4.0)
SCAN_GAMMAS = (0.0, 0.05, 0.1, 0.15, 0.2, 0.3)
DOUBLE_WELL_GAMMAS = (0.0, 0.05, 0.1, 0.15, 0.2, 0.25)
DOUBLE_WELL_REFINED_GAMMAS = (0.1, 0.2)

# (n, z_extent) for the spectroscopy runs; refinement doubles n and halves dt
SPECTRO_GRIDS = {"quartic": (64, 10.0), "harmonic": (64, 14.0), "double_well": (96, 8.0)}
SPECTRO_DT = 4e-3


@dataclass
class CheckResult:
    criterion: int
    name: str
    value: float
    threshold: float
    relation: str
    passed: bool
    seconds: float = 0.0
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (f"[{verdict}] criterion {self.criterion:2d} {self.name}: "
                f"{self.value:.6g} {self.relation} {self.threshold:.3g}")


def _row(criterion, name, value, threshold, relation="<", **detail) -> CheckResult:
    value = float(value)
    ok = {"<": value < threshold, ">": value > threshold, "<=": value <= threshold,
          ">=": value >= threshold}[relation]
    return CheckResult(criterion, name, value, float(threshold), relation, bool(ok and math.isfinite(value)),
                       detail=detail)


def _timed(criterion: int):
    """Time a check; an exception becomes a single failed row for ``criterion``."""
    return lambda fn: _timed_check(fn, criterion)


def _timed_check(fn, criterion: int):
    def wrapper():
        t0 = time.perf_counter()
        try:
            rows = fn()
        except Exception as exc:  # a crashed check is a failed check
            rows = [CheckResult(criterion, f"{fn.__name__} raised {type(exc).__name__}: {exc}",
                                float("nan"), float("nan"), "ok", False)]
        elapsed = time.perf_counter() - t0
        for r in rows:
            r.seconds = elapsed
        return rows
    wrapper.__name__ = fn.__name__
    wrapper.criterion = criterion
    return wrapper


# ---------------------------------------------------------------- oracles

def brute_force_quantum_transform(psi_c: PhaseField) -> np.ndarray:
    """Literal four-fold lattice sum for ``rho_w`` (reference for small grids).

    ``rho_w(z, p) = sum_{r, r', s, s'} psi(z + r/2, p + s) psi(z + r'/2, p + s')
    cos((s r' - s' r)/hbar) (dr dp / 2 pi hbar)^2`` with momentum offsets taken
    periodically and positions outside the box set to zero.
    """
    g = psi_c.grid
    v = np.asarray(psi_c.values, dtype=float)
    n, half = g.n_p, g.n_p // 2
    off = np.arange(n) - half
    s, r = off * g.dp, off * g.dr
    # sum_{m,s,m',s'} A[m,s] A[m',s'] cos(s r_m' - s' r_m) = Re tr(A E A F)
    e = np.exp(1j * np.outer(s, r) / g.hbar)    # E[s, m'] = exp(i s r_m')
    f = np.exp(-1j * np.outer(s, r) / g.hbar)   # F[s', m] = exp(-i s' r_m)
    out = np.zeros(g.shape)
    for j in range(g.n_z):
        rows = j + off
        inside = (rows >= 0) & (rows < g.n_z)
        for l in range(n):
            a = np.zeros((n, n))
            a[inside] = v[rows[inside]][:, (l + off) % n]
            out[j, l] = np.real(np.trace(a @ e @ a @ f))
    return out * (g.dr * g.dp / (2 * math.pi * g.hbar)) ** 2


def _random_smooth_field(grid, rng: np.random.Generator, envelope: float = 1.0) -> PhaseField:
    z, p = grid.mesh()
    poly = sum(rng.normal() * z ** a * p ** b for a in range(4) for b in range(4) if a + b <= 4)
    zc, pc = rng.uniform(-1, 1, size=2)
    return PhaseField(grid, poly * np.exp(-((z - zc) ** 2 + (p - pc) ** 2) / (2 * envelope ** 2)))


# ---------------------------------------------------------------- criterion 1 and 2

def _packet_grid():
    return make_grid(256, 256, 20.0)


@_timed(1)
def quantum_limit():
    g = _packet_grid()
    rows = []
    for pot, tol in ((QUARTIC, 1e-4), (HARMONIC, 1e-6)):
        psi_q = gaussian_packet(g, 1.5, 0.0)
        _, psi_c = pure_state_density(psi_q)
        out, _ = evolve(psi_c, pot, PropagatorConfig(0.0, 1e-3), 5.0, report_every=500)
        reference = wigner_of_pure_state(schrodinger_evolve(psi_q, pot, 1e-3, 5.0)).values
        diff = np.max(np.abs(quantum_transform(out).values - reference))
        rows.append(_row(1, f"quantum limit {pot.kind}: max|rho_w - W_schrodinger|", diff, tol))
    return rows


@_timed(2)
def classical_limit():
    g = _packet_grid()
    rows = []
    for pot, tol in ((QUARTIC, 5e-3), (HARMONIC, 1e-4)):
        w0, psi_c = pure_state_density(gaussian_packet(g, 1.5, 0.0))
        # tails of the quartic packet filament below the momentum spacing; the
        # resulting ringing reaches the box edges at the 1e-7 level
        cfg = PropagatorConfig(math.pi / 2, 1e-3, boundary_monitor_threshold=1e-6)
        psi = ZwitterPropagator(g, pot, cfg).run(np.asarray(psi_c.values, dtype=float), 5000)
        oracle = liouville_characteristics(w0, pot, 5.0, 2000)
        dist = float(np.sum(np.abs(psi ** 2 - oracle.w.values)) * g.measure)
        edge = _edge_mass(psi, g)
        rows.append(_row(2, f"classical limit {pot.kind}: L1(w, liouville)", dist, tol,
                         edge_mass=edge, oracle_renormalization=oracle.renormalization))
        rows.append(_row(2, f"classical limit {pot.kind}: edge mass", edge,
                         cfg.boundary_monitor_threshold))
    return rows


# ---------------------------------------------------------------- criterion 3

@_timed(3)
def conservation():
    g = make_grid(128, 128, 16.0)
    _, psi_c = pure_state_density(gaussian_packet(g, 1.5, 0.0))
    rows = []
    for gamma in (0.0, 0.3, math.pi / 2):
        prop = ZwitterPropagator(g, QUARTIC, PropagatorConfig(gamma, 1e-3))
        psi = np.asarray(psi_c.values, dtype=float)
        norm_err = mass_err = 0.0
        min_w = math.inf
        for _ in range(10):
            psi = prop.run(psi, 1000)
            w = psi * psi
            norm_err = max(norm_err, abs(math.sqrt(float(np.sum(w)) * g.measure) - 1.0))
            mass_err = max(mass_err, abs(float(np.sum(w)) * g.measure - 1.0))
            min_w = min(min_w, float(w.min()))
        label = f"gamma={gamma:.4g}"
        rows.append(_row(3, f"conservation {label}: max | ||psi_C|| - 1 |", norm_err, 1e-10))
        rows.append(_row(3, f"conservation {label}: min w", min_w, 0.0, ">="))
        rows.append(_row(3, f"conservation {label}: max | int w - 1 |", mass_err, 1e-9))
    return rows


# ---------------------------------------------------------------- criterion 4

def _identity_states(g, rng):
    """Pure-state zwitters of varied packets plus evolved states."""
    states = [pure_state_density(gaussian_packet(g))[1]]
    for _ in range(6):
        z0, p0 = rng.uniform(-1.5, 1.5, size=2)
        states.append(pure_state_density(gaussian_packet(g, z0, p0, rng.uniform(0.5, 1.0)))[1])
    base = pure_state_density(gaussian_packet(g, 1.0, 0.5))[1]
    for gamma in (0.3, 0.8, math.pi / 2):
        states.append(evolve(base, QUARTIC, PropagatorConfig(gamma, 2e-3), 1.0)[0])
    return states


@_timed(4)
def operator_identities():
    rng = np.random.default_rng(1234)
    # w = psi^2 and rho_w carry twice the bandwidth of psi_C; 256 points keep
    # the evolved states free of aliasing
    g = _packet_grid()
    rows = []
    worst = 0.0
    for _ in range(20):
        f = _random_smooth_field(g, rng)
        comm = apply_XQ(apply_PQ(f)).values - apply_PQ(apply_XQ(f)).values
        worst = max(worst, float(np.max(np.abs(comm - 1j * g.hbar * f.values)) / np.max(np.abs(f.values))))
    rows.append(_row(4, "commutator [X_Q, P_Q] = i hbar on 20 fields", worst, 1e-10))

    states = _identity_states(g, rng)
    worst = 0.0
    for psi in states:
        dec = momentum_roughness_decomposition(PhaseField(g, psi.values ** 2))
        worst = max(worst, abs(dec.total - quantum_expectation(psi, Mul((PQ, PQ)))))
    rows.append(_row(4, "momentum roughness total vs <P_Q^2> on 10 states", worst, 1e-6))
    ground = momentum_roughness_decomposition(PhaseField(g, states[0].values ** 2))
    analytic = max(abs(ground.p_cl_sq - 0.25), abs(ground.roughness - 0.25), abs(ground.total - 0.5))
    rows.append(_row(4, "harmonic ground state decomposition vs (0.25, 0.25, 0.5)", analytic, 1e-6))

    worst = 0.0
    monomials = [(a, b) for a in range(5) for b in range(5) if a + b <= 4]
    for psi in states:
        rho_w = quantum_transform(psi)
        for a, b in monomials:
            op = quantum_expectation(psi, polynomial_expression({(a, b): 1.0}))
            ph = symmetrized_moment(rho_w, lambda z, p, a=a, b=b: z ** a * p ** b)
            worst = max(worst, abs(op - ph))
    rows.append(_row(4, "phase-space vs operator path, monomials of degree <= 4", worst, 1e-8))
    return rows


# ---------------------------------------------------------------- criterion 5 and 6

@_timed(5)
def transform_equivalence():
    rng = np.random.default_rng(99)
    g = make_grid(128, 128, 20.0)
    states = [_random_smooth_field(g, rng) for _ in range(4)]
    states += [pure_state_density(gaussian_packet(g, 1.0, -0.5))[1],
               pure_state_density(double_slit_state(g, 3.0, 0.6))[1]]
    base = pure_state_density(gaussian_packet(g, 0.5, 0.5))[1]
    for gamma in (0.0, 0.3, 0.9, math.pi / 2):
        states.append(evolve(base, QUARTIC, PropagatorConfig(gamma, 2e-3), 1.0)[0])
    worst = 0.0
    for psi in states:
        direct = quantum_transform(psi).values
        chain = wigner_of_density_matrix(coarse_grain(to_xy_representation(psi))).values
        worst = max(worst, float(np.max(np.abs(direct - chain))))
    rows = [_row(5, "rho_w direct vs coarse-grained chain on 10 states", worst, 1e-9)]

    small = make_grid(12, 12, 6.0)
    brute = 0.0
    for _ in range(2):
        f = PhaseField(small, rng.normal(size=small.shape))
        brute = max(brute, float(np.max(np.abs(quantum_transform(f).values
                                                - brute_force_quantum_transform(f)))))
    rows.append(_row(5, "rho_w spectral vs four-fold sum on 12x12", brute, 1e-8))
    return rows


@_timed(6)
def pure_round_trip():
    g = make_grid(128, 128, 20.0)
    states = [gaussian_packet(g), gaussian_packet(g, 1.5, -1.0, 0.6), double_slit_state(g, 4.0, 0.5),
              solve_spectrum(g, QUARTIC).psi1]
    worst_f = worst_p = 0.0
    for psi_q in states:
        _, psi_c = pure_state_density(psi_q)
        rho = coarse_grain(to_xy_representation(psi_c))
        worst_f = max(worst_f, 1.0 - rho.fidelity(psi_q))
        worst_p = max(worst_p, abs(rho.purity() - 1.0))
    return [_row(6, "pure-state round trip: 1 - fidelity", worst_f, 1e-8),
            _row(6, "pure-state round trip: |purity - 1|", worst_p, 1e-8)]


# ---------------------------------------------------------------- criterion 7

def _energy_drift(gamma: float) -> float:
    g = _packet_grid()
    _, psi_c = pure_state_density(gaussian_packet(g, 1.5, 0.0))
    h = Hamiltonian(QUARTIC)
    _, report = evolve(psi_c, QUARTIC, PropagatorConfig(gamma, 1e-3, "yoshida4"), 10.0,
                       {"H": lambda f: quantum_expectation(f, h)}, report_every=100)
    energies = np.asarray(report.observables["H"])
    return float(np.max(np.abs(energies - energies[0])))


@_timed(7)
def energy_signature():
    quiet, loud = _energy_drift(0.0), _energy_drift(0.3)
    return [_row(7, "gamma=0 drift of <H_Q>", quiet, 1e-8),
            _row(7, "gamma=0.3 drift / gamma=0 drift", loud / max(quiet, 1e-300), 100.0, ">",
                 drift_gamma_0=quiet, drift_gamma_03=loud)]


# ---------------------------------------------------------------- criterion 8

@lru_cache(maxsize=None)
def spectroscopy_scan(kind: str, refine: int = 1, gammas: tuple = SCAN_GAMMAS):
    n, length = SPECTRO_GRIDS[kind]
    pot = {"quartic": QUARTIC, "harmonic": HARMONIC}[kind]
    g = make_grid(n * refine, n * refine, length)
    try:
        return scan_gamma(g, pot, gammas, dt=SPECTRO_DT / refine)
    except FitError:
        from .spectroscopy import zwitter_ground_state
        spectrum = solve_spectrum(g, pot)
        return [zwitter_ground_state(g, pot, gm, dt=SPECTRO_DT / refine, spectrum=spectrum)[1]
                for gm in gammas], {}


@_timed(8)
def spectroscopy_scaling():
    results, fits = spectroscopy_scan("quartic")
    fit = fits["width"]
    rows = [_row(8, "quartic |slope(log dE vs log sin^2 gamma) - 1|", abs(fit.slope - 1.0), 0.1,
                 "<=", slope=fit.slope, intercept=fit.intercept),
            _row(8, "quartic fit R^2", fit.r_squared, 0.99, ">")]
    rel = max(abs(r.shift) / r.width for r in results if 0 < r.gamma <= 0.3)
    rows.append(_row(8, "quartic max dE_shift/dE for gamma <= 0.3", rel, 0.25))
    zero = next(r for r in results if r.gamma == 0)
    rows.append(_row(8, "quartic gamma=0 width", zero.width, 1e-7))
    rows.append(_row(8, "quartic gamma=0 shift", abs(zero.shift), 1e-7))
    harm, _ = spectroscopy_scan("harmonic")
    rows.append(_row(8, "harmonic max width over gamma", max(r.width for r in harm), 1e-7))
    return rows


# ---------------------------------------------------------------- criterion 9

@lru_cache(maxsize=None)
def envelope_profiles(refine: int = 1):
    cfg = ENVELOPE_CONFIG.refined(refine) if refine > 1 else ENVELOPE_CONFIG
    return tuple(run_double_slit(cfg))


@_timed(9)
def double_slit():
    free = run_double_slit(FREE_CONFIG)[0]
    oracle = schrodinger_profile(FREE_CONFIG)
    env_oracle = schrodinger_profile(ENVELOPE_CONFIG)
    profiles = envelope_profiles()
    expected = 2 * math.pi * FREE_CONFIG.grid.hbar * FREE_CONFIG.horizon / (FREE_CONFIG.grid.mass
                                                                          * FREE_CONFIG.separation)
    rows = [
        _row(9, "free gamma=0 visibility vs Schrodinger (relative)",
             abs(free.visibility - oracle.visibility) / oracle.visibility, 0.02),
        _row(9, "envelope gamma=0 visibility vs Schrodinger (relative)",
             abs(profiles[0].visibility - env_oracle.visibility) / env_oracle.visibility, 0.02),
        _row(9, "free fringe spacing error vs 2 pi hbar T/(m d) [grid cells]",
             abs((free.spacing or math.inf) - expected) / FREE_CONFIG.grid.dz, 1.0, "<=",
             spacing=free.spacing, expected=expected),
        _row(9, "visibility(pi/2) - visibility(0)", profiles[-1].visibility - profiles[0].visibility, 0.0,
             visibilities=[p.visibility for p in profiles]),
        _row(9, "largest visibility increase along the gamma grid",
             max(b.visibility - a.visibility for a, b in zip(profiles, profiles[1:])), 0.01, "<="),
    ]
    return rows


# ---------------------------------------------------------------- criterion 10

@lru_cache(maxsize=None)
def double_well_report(refine: int = 1, gammas: tuple = DOUBLE_WELL_GAMMAS):
    n, length = SPECTRO_GRIDS["double_well"]
    g = make_grid(n * refine, n * refine, length)
    return run_double_well_proximity(g, DOUBLE_WELL, gammas, dt=SPECTRO_DT / refine)


def _relative(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b))


@_timed(10)
def self_convergence():
    rows = []
    coarse, _ = spectroscopy_scan("quartic")
    fine, _ = spectroscopy_scan("quartic", 2)
    worst = max(_relative(c.width, f.width) for c, f in zip(coarse, fine) if c.gamma > 0)
    rows.append(_row(10, "quartic widths, default vs 2x refined (relative)", worst, 0.02,
                     coarse=[c.width for c in coarse], fine=[f.width for f in fine]))
    vis_c = [p.visibility for p in envelope_profiles()]
    vis_f = [p.visibility for p in envelope_profiles(2)]
    rows.append(_row(10, "double-slit visibilities, default vs 2x refined (relative)",
                     max(_relative(a, b) for a, b in zip(vis_c, vis_f)), 0.02, coarse=vis_c, fine=vis_f))
    dw = double_well_report()
    dw_fine = double_well_report(2, DOUBLE_WELL_REFINED_GAMMAS)
    lookup = dict(zip(dw.gammas, dw.ratios))
    worst = max(_relative(lookup[gm], r) for gm, r in zip(dw_fine.gammas, dw_fine.ratios))
    rows.append(_row(10, "double-well width/splitting ratios, default vs 2x refined (relative)", worst, 0.02,
                     coarse=[lookup[gm] for gm in dw_fine.gammas], fine=list(dw_fine.ratios)))
    return rows


@_timed(0)
def double_well_trend():
    """Not a numbered criterion: the double-well examples (quantum limit, monotone ratio)."""
    dw = double_well_report()
    rows = [_row(0, "double well gamma=0 width/splitting", dw.ratios[0], 1e-5),
            _row(0, "double well largest ratio decrease along gamma",
                 max(a - b for a, b in zip(dw.ratios, dw.ratios[1:])), 0.0, "<=",
                 crossing=dw.crossing_gamma, crossing_uncertainty=dw.crossing_uncertainty)]
    return rows


# ---------------------------------------------------------------- suites

SUITES = {
    "oracles": (quantum_limit, classical_limit),
    "conservation": (conservation,),
    "identities": (operator_identities,),
    "transforms": (transform_equivalence, pure_round_trip),
    "energy": (energy_signature,),
    "spectroscopy": (spectroscopy_scaling,),
    "doubleslit": (double_slit,),
    "doublewell": (double_well_trend,),
    "convergence": (self_convergence,),
}
SUITES["quick"] = SUITES["identities"] + SUITES["transforms"]
SUITES["all"] = tuple(fn for key in ("oracles", "conservation", "identities", "transforms", "energy",
                                     "spectroscopy", "doubleslit", "doublewell", "convergence")
                      for fn in SUITES[key])


def run_suite(selector: str) -> list[CheckResult]:
    if selector not in SUITES:
        raise KeyError(f"unknown suite {selector!r}; choose from {', '.join(sorted(SUITES))}")
    return [row for fn in SUITES[selector] for row in fn()]


def validate(selector: str = "quick") -> dict:
    """Run a suite and return a JSON-serialisable verdict."""
    rows = run_suite(selector)
    return {"selector": selector, "passed": all(r.passed for r in rows),
            "checks": [asdict(r) for r in rows]}


def to_json(verdict: dict) -> str:
    return json.dumps(verdict, indent=2, default=float)
