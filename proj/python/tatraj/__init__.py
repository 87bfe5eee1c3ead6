"""Community time-activity trajectories (C++ core)."""

from ._tatraj import (
    TatrajError,
    TransitionModel,
    __version__,
    analytic_profile,
    boxs_m_test,
    correlation,
    digamma,
    dirichlet_log_density,
    estimate_transitions,
    fit_regression,
    kmeans,
    log_gamma,
    loglik_and_score,
    run_all,
    simulate_profile,
    synthesize,
    ternary_coordinates,
    trigamma,
    welch_t_test,
    zero_replace,
)

CATEGORIES = ("c01", "c02", "c03", "c04", "c05", "c06", "c07", "c08")
