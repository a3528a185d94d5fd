"""Semi-Markov process simulation and tightness diagnostics on Skorokhod space.

Simulate product-form semi-Markov models, evaluate exact path functionals
(partition modulus, oscillation crossing times, sup-norms), and run Monte
Carlo diagnostics for tightness-style conditions: next-jump gap decay,
short-holding-time probabilities, compact containment, compensated-bump
submartingale checks, martingale residuals, scaled-family bounds, and the
two-state family where the submartingale check passes while tightness
fails.
"""

from .counterexample import (
    CounterexampleModel,
    build_counterexample,
    counterexample_family,
    demonstrate_condition_D,
    demonstrate_nontightness,
    one_step_inequality,
)
from .diagnostics import (
    FAIL,
    INFO,
    PASS,
    BumpFunction,
    Estimate,
    FamilySpec,
    apply_L,
    apply_L_time,
    check_compact_containment,
    check_condition_D,
    check_condition_iv,
    constant_phi,
    coordinate_phi,
    estimate_d,
    estimate_modulus_tail,
    martingale_residual,
    norm_sq_phi,
    scan_condition_iii,
    search_condition_D_constant,
    square_phi,
)
from .kernels import (
    NEVER,
    CustomHolding,
    Deterministic,
    Exponential,
    HoldingTime,
    Never,
    Pareto,
    PointInitial,
    SemiMarkovModel,
    TransitionKernel,
    TwoPoint,
    Weibull,
    as_state,
    constant_kernel,
    integrated_tail,
    jump_to_kernel,
    mean_holding,
    point_initial,
    shift_kernel,
    symmetric_step_kernel,
    tail,
    uniform_model,
)
from .renewal import (
    DEFAULT_STEP_LIMIT,
    HORIZON_EXCEEDED,
    JumpPath,
    RenewalRecord,
    Truncation,
    forward_gap_samples,
    forward_jump,
    simulate_chain,
    simulate_chain_batch,
    to_path,
)
from .reporting import OpReport, RunReport, Table, report_json_bytes, write_report
from .scaling import (
    ScaledFamily,
    ScalingScheme,
    averaging_scheme,
    diffusion_scheme,
    explicit_scheme,
    scan_theorem3,
    theorem3_J,
    verify_d_bound,
)
from .skorokhod import OscillationStats, oscillation_stats, sup_norm, w_prime
from .streams import parallel_map, spawn_rng

__version__ = "0.1.0"
