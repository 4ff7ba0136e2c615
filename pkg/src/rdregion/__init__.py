"""Rate-distortion regions for distributed coding of correlated Gaussian sources.

The package computes, optimizes over, and cross-validates inner/outer
bounds of rate-distortion regions in two layouts: a *remote* layout where
encoders observe a hidden Gaussian source through noisy linear channels,
and a *multiterminal* layout where the correlated observations themselves
are compressed. It ships water-filling solvers for the determinant levels
behind the outer bounds, sum-rate bound programs, matching-condition
thresholds, the exact transform between the two layouts, shift-invariant
(cyclic) sum-rate curves, and closed-form two-source special cases. All
rates are in nats.

Submodules carry the full API; the names re-exported here cover the
common entry points.
"""

from . import cyclic, duality, errors, linalg, matching, optimize, problems, regions, sumrate, waterfill
from .cyclic import cyclic_instance, shift_residual
from .duality import dual_criterion, dual_remote, transform_covariance, transform_data
from .matching import md_scan, threshold_noise, threshold_rotation, threshold_simplified
from .problems import (
    MatrixCrit,
    MultiterminalProblem,
    RemoteProblem,
    SumCrit,
    VectorCrit,
    load_problem,
    problem_from_dict,
)
from .regions import (
    RegionSpec,
    check_co_polymatroid,
    min_weighted_sum,
    mt_region_inner,
    mt_region_outer,
    region_inner,
    region_outer,
)
from .sumrate import (
    boundary_batch,
    sum_rate_bounds,
    sum_rate_lower,
    sum_rate_upper,
    threshold_split,
    threshold_weighted,
    twoterm_curve_point,
    twoterm_region_curve,
    twoterm_sum_rate,
    zeta,
)
from .waterfill import det_oracle, feasible_at_rates, max_det_capped, water_level, waterfill_det

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "cyclic",
    "duality",
    "errors",
    "linalg",
    "matching",
    "optimize",
    "problems",
    "regions",
    "sumrate",
    "waterfill",
    "cyclic_instance",
    "shift_residual",
    "dual_criterion",
    "dual_remote",
    "transform_covariance",
    "transform_data",
    "md_scan",
    "threshold_noise",
    "threshold_rotation",
    "threshold_simplified",
    "MatrixCrit",
    "MultiterminalProblem",
    "RemoteProblem",
    "SumCrit",
    "VectorCrit",
    "load_problem",
    "problem_from_dict",
    "RegionSpec",
    "check_co_polymatroid",
    "min_weighted_sum",
    "mt_region_inner",
    "mt_region_outer",
    "region_inner",
    "region_outer",
    "boundary_batch",
    "sum_rate_bounds",
    "sum_rate_lower",
    "sum_rate_upper",
    "threshold_split",
    "threshold_weighted",
    "twoterm_curve_point",
    "twoterm_region_curve",
    "twoterm_sum_rate",
    "zeta",
    "det_oracle",
    "feasible_at_rates",
    "max_det_capped",
    "water_level",
    "waterfill_det",
]
