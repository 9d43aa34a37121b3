"""Least squares estimation under shape-restriction cones.

Projections onto the cones, exact evaluation of adaptive risk bounds through
partition optimization, statistical dimensions, and Monte Carlo experiments
that check the bounds.
"""

from conerisk.bounds import (
    BoundReport,
    bound_amon,
    bound_general_cone,
    bound_hh,
    bound_miss,
    bound_R,
    bound_R_D,
    bound_R_S,
    bound_RZ,
    increasing_rate_check,
    local_sup_bound,
    lower_bound_values,
    separated_levels_sandwich,
    strict_increase_sandwich,
    tau_general,
    tau_isotonic,
)
from conerisk.core import (
    ConeSpec,
    IntervalPartition,
    block_count,
    generated_partition,
    loss,
    membership,
    parse_sequence,
    strict_count,
)
from conerisk.errors import (
    ConeRiskError,
    HypothesisViolated,
    InvalidInputError,
    NonConvergence,
    NotInConeError,
    NotMonotoneError,
)
from conerisk.partition import (
    PartitionCurve,
    brute_force_curve,
    min_dpi2_curve,
    min_spi2_curve,
    min_vpi_curve,
)
from conerisk.projection import (
    ProjectionResult,
    minmax_formula,
    monotone_projection,
    pava,
    project,
    project_cone,
)
from conerisk.simulation import (
    AssouadFamily,
    RiskEstimate,
    assouad_checks,
    build_assouad,
    generate,
    risk_mc,
    verify_bound,
)
from conerisk.statdim import (
    MonteCarloDeltaTable,
    StatDimEstimate,
    delta_isotonic_exact,
    delta_level_count,
    delta_monte_carlo,
)
from conerisk.variation import VariationReport, d_pi, s_pi, v_pi, variation_report

__version__ = "0.1.0"
