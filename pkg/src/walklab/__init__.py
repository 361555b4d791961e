"""walklab: lattice random walks, global observables, and limit-law checks."""

from .birkhoff import (BirkhoffAccumulator, OccupationTally, occupation_covariance,
                       ocean_event_check, run_birkhoff, run_occupation,
                       t_tilde_decomposition_gap)
from .chains import (ThreeStateChain, chain_sweep, exact_occupation_moments,
                     lemma_bound_check, simulate_occupation_moments, walk_to_chain)
from .errors import BudgetError, ConfigError, WalklabError
from .kernels import (LatticeKernel, advance_kernel, delta_kernel, kernel_at,
                      kernel_history, llt_report, tail_report)
from .laws import StepLaw, make_step_law
from .moments import (MomentPlan, enumerate_moments, exact_mean_T, exact_pair_moment,
                      exact_second_moment, variance_exponent_scan)
from .observables import (CubeSpec, Observable, beta_fit, cube, cube_average,
                          cube_average_direct, diophantine_quality, make_constant,
                          make_heaviside, make_ocean, make_ocean_multidim,
                          make_periodic, make_quasiperiodic, make_scenery,
                          make_table_observable)
from .ocean import OceanSchedule
from .sampling import Trajectory, exit_horizon, min_tail_report, sample_path
from .statlab import (ArcsineLaw, TrialEnsemble, affine_reduce, arcsine_cdf,
                      gamma_threshold, geometric_checkpoints, growth_exponent,
                      ks_distance, rho_exponent, run_ensemble, weak_lln_check)

__version__ = "0.1.0"
