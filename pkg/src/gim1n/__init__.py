"""Loss probabilities of the GI/M/1/n queue: exact, asymptotic and simulated."""

from gim1n._backend import NAME as BACKEND
from gim1n.asympt import (
    AsymptoticEstimate,
    Regime,
    Source,
    approx_critical,
    approx_subcritical,
    classify,
    heavy_traffic_approx,
    limit_supercritical,
    near_critical_approx,
    reciprocal_increment,
)
from gim1n.dist import (
    Deterministic,
    Erlang,
    Exponential,
    Hyperexponential,
    InterarrivalModel,
    Quadrature,
    QueueStats,
    completion_probs,
    format_dist,
    lst,
    lst_derivative,
    parse_dist,
    queue_stats,
    sample,
    scaled_moment,
    tail_cutoff,
)
from gim1n.errors import (
    ConvergenceError,
    DegenerateModelError,
    GIM1Error,
    NumericalError,
    OutOfRegimeError,
    UnsupportedModelError,
)
from gim1n.kernel import LossTable, QueueSpec, loss_probability, solve_loss_table, verify_recurrence
from gim1n.roots import SigmaSolution, sigma_expansion, solve_sigma
from gim1n.sim import SimEstimate, simulate, warmup_policy

__version__ = "0.1.0"
