"""Classical wave functions on phase space with a tunable quantum/classical generator."""
from .grid import GridError, GridSpec, PhaseField, make_grid
from .potentials import Potential, parse_potential
from .state import (ClassicalWaveFunction, ProbabilityDensity, QuantumWaveFunction,
                    SpectrumError, StateError, gaussian_packet, pure_state_density,
                    solve_spectrum, wigner_of_pure_state)

__version__ = "0.1.0"
