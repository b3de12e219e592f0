"""Weak values of finite-dimensional systems: analytic, operational, and diagnostic."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .hilbert import (Operator, StateVector, apply, basis_state, check_unitary, identity,
                      inner, projector, spectral_decompose, state_from_amplitudes, tensor)
from .meter import GaussianSpec, init_gaussian, norm_squared, q_mean, render_grid, sample_q
from .scenarios import (BUILTINS, Scenario, build_appendix_a, build_cheshire,
                        build_nested_mzi, build_simple_mzi, builtin, load_scenario,
                        load_scenario_file, validate_scenario)
from .protocol import (CouplingSpec, GSchedule, couple_exact, couple_linearized,
                       delta_sweep_weak_value, evolve, monte_carlo_weak_value,
                       operational_weak_value, pointer_mean_postselected, postselect)
from .analysis import (BehaviorClass, analytic_weak_value, channel_weak_values, classify,
                       derailment_trace, s_expectation)
