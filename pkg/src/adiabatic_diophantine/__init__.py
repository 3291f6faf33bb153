"""Adiabatic decision procedure for Diophantine equations, simulated on truncated Fock spaces."""

__version__ = "0.1.0"

from .diophantine import ParseError, Polynomial, evaluate, parse, search_box
from .evolve import (
    EvolutionConfig,
    EvolutionRecord,
    evolve,
    step_extrapolate,
    truncation_check,
)
from .fock import (
    BasisIndexer,
    CoherentParams,
    TruncationError,
    add_symmetry_breaking,
    build_H,
    build_HI,
    build_HP,
    coherent_state,
    phase_transform,
    to_real_frame,
)
from .protocol import (
    ProblemConfig,
    Verdict,
    decide,
    degeneracy_guard,
    max_probability,
    plan_repetitions,
    simulate_measurements,
)
from .spectral import (
    TrotterConfig,
    displacement_matrix_element,
    semigroup_positivity,
    spectral_flow,
    trotter_product,
)
from .twolevel import TwoLevelProblem, flow_integral, propagate, sweep_T

__all__ = [name for name in dir() if not name.startswith("_")]
