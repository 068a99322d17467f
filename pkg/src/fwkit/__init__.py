"""Projection-free conditional-gradient (Frank-Wolfe) toolkit."""
from .core import (ActiveSet, AtomStore, CapabilityError, ConfigError, ContractViolation,
                   FwkitError, GapReport, NumericFailure, RunTrace, active_set_update,
                   finite_diff_check, fw_gap, strong_fw_gap)
from ._plumbing import RunConfig
from .steps import StepRule, AdaptiveState, adaptive_step, line_search, open_loop_step, short_step
from .regions import make_region
from .deterministic import (ALGORITHMS, BoostConfig, CgsSchedule, boost_direction, cg_projection,
                            run_afw, run_bcg, run_boostfw, run_cgs, run_dipfw, run_fcfw, run_fw,
                            run_hcgs, run_lazy, run_nepfw, run_pfw, simplex_descent)
from .stochastic import (FiniteSumOracle, NoisyOracle, StochasticSchedule, default_schedule,
                         estimate_gradient, run_scgs, run_stochastic_fw)
from .applications import approx_caratheodory, dopt_design, dopt_rank1_update, meb_coreset

__version__ = "0.1.0"
