"""Two-mode cavity self-trapping and cooling of a levitated nanosphere."""

from .closed_forms import (
    ResonancePoint, dr_detunings, dr_detunings_numeric, gamma_dr, gamma_sr,
    sr_detunings, symmetric_dr, symmetric_dr_detunings,
)
from .equilibrium import Equilibrium, solve_equilibrium
from .errors import (
    AmbiguousEquilibriumError, DivergenceError, FitRejectedError, InvalidParameterError,
    NoEquilibriumError, SelfTrapError, SolverError, StiffnessError, UnstableEquilibriumError,
)
from .linear_response import (
    CoolingReport, build_linear_system, cooling_rate, eigen_gamma, sideband_splitting,
    spring_shift,
)
from .params import PhysicalParams, ScaledParams, load_config, parse_config, scale_physical
from .quantum_rates import PhononRates, min_phonon, phonon_rates
from .simulator import SimState, StepControl, Trajectory, extract_rate, integrate, simulate_rate
from .sweeps import SweepGrid, phase_sweep, power_scan, resonance_loci, sweep_map

__version__ = "0.1.0"
