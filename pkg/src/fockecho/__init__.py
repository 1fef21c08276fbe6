"""Loschmidt echoes of an oscillator coupled to a single spin with a displaced lower level."""
from .errors import (BelowBarrierError, ContractError, ConvergenceError, ExtractionError,
                     FitDomainError, FockEchoError, TruncationError)
from .model import (CrossingInfo, Hamiltonian, ModelParams, StateVector, apply_hamiltonian,
                    crossing_parameters, crossing_point, hamiltonian_matrix,
                    landau_zener_probability, mean_position, default_params, position_density,
                    recommended_cutoff, wavefunction)
from .states import CatSpec, IncoherentBranches, cat_state, coherent_state, incoherent_branches
from .propagator import ChebyshevPropagator, EvolutionConfig, evolve_free, evolve_full, evolve_samples
from .loschmidt import (EchoKind, LETrace, incoherent_from_amplitudes, incoherent_monte_carlo,
                        le_trace, loschmidt_incoherent, loschmidt_naive, loschmidt_raw,
                        loschmidt_reduced, superposition_traces)
from .landau_zener import (Timescales, analytic_timescales, crossing_times, find_step_drops,
                           first_step_depth, gaussian_timescale_fit, markov_reference_curve,
                           revival_between)
from .fragility import FragilityRecord, ScalingFit, fit_scaling, fragility_point, fragility_scan, mean_le

__version__ = "0.1.0"
