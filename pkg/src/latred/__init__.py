"""Fixed-complexity LLL reductions (greedy GfcLLL and baselines) with Babai detection."""

from .estimation import (
    BabaiResult,
    BoxConstraint,
    babai,
    clamp_to_box,
    ils_brute_force,
    phi,
    reduced_babai,
    success_probability,
)
from .linalg import RankDeficientError, apply_givens_rows, qr_factorize, residual_norm
from .reduction import (
    ReductionReport,
    ReductionState,
    Strategy,
    efclll,
    fclll,
    gfclll,
    is_effectively_lll_reduced,
    is_lll_reduced,
    lll,
    lovasz_violated_after_reduce,
    score,
    size_reduce_entry,
    swap_and_retriangularize,
)
from .simulation import ExperimentConfig, QamSpec, run_experiment

__version__ = "0.1.0"
