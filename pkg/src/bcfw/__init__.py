"""Projection-free block-coordinate Frank-Wolfe methods.

The package splits into block vectors (:mod:`bcfw.core`), linear
minimization oracles (:mod:`bcfw.lmo`), objectives (:mod:`bcfw.objective`),
activation schedules (:mod:`bcfw.blocks`), the solver engines and rate
bounds (:mod:`bcfw.solver`), and the experiment harness with its trace
files and CLI (:mod:`bcfw.experiments`, :mod:`bcfw.traces`, :mod:`bcfw.cli`).
"""

from .blocks import (
    CoverageReport,
    Custom,
    Cyclic,
    Full,
    PCyclic,
    PQLazy,
    QLazy,
    Schedule,
    ScheduleSpecError,
    parse_schedule,
    verify_coverage,
)
from .core import BlockShapeError, BlockVector, as_index_set, blend_block, blended, inner, norm_sq, norm_sq_on
from .experiments import (
    ConfigError,
    ExperimentConfig,
    Problem,
    dcquad_problem,
    init_x0,
    intersect_problem,
    run_experiment,
    run_experiment_dcquad,
    run_experiment_intersect,
)
from .lmo import (
    Box,
    ConvergenceError,
    LinfBall,
    NuclearBall,
    ProductDomain,
    Spectraplex,
    lmo_box,
    lmo_linf_ball,
    lmo_nuclear_ball,
    lmo_product,
    lmo_spectraplex,
    min_eigenpair,
    top_singular_triple,
)
from .objective import (
    CollatedQuadraticDifference,
    QuadraticDistance,
    SmoothObjective,
    cqd_lipschitz,
    finite_diff_check,
    psd_project,
)
from .solver import (
    Adaptive,
    GapError,
    RunResult,
    ShortStep,
    WhileCapError,
    adaptive_eval_bound,
    convex_rate_bound,
    extra_gap_A,
    fw_gap,
    huber_perspective,
    m_burn_in,
    nonconvex_rate_bound,
    partial_gap,
    recursion_bound,
    rho,
    run_adaptive,
    run_componentwise_linesearch,
    run_short_step,
)
from .traces import emit_plots, read_trace_csv, write_trace_csv

__version__ = "0.1.0"
