"""Python bindings of the Adam gradient-scale invariance lab."""

from ._scalelab import (
    DomainError,
    ExponentialGains,
    GradientSignal,
    Method,
    MomentState,
    OptimizerConfig,
    OscillationGridReport,
    ParseError,
    RescaleProbeResult,
    ScalarSignal,
    StructuralError,
    TimeScales,
    __version__,
    adam_step,
    beta_from_tau,
    binomial_diagonal_test,
    constant_gradient_closed_form,
    drift_bounds,
    ema_smooth,
    exact_invariance_probe,
    first_order_sensitivity,
    gd_step,
    grid_report,
    integrate_flow,
    log_drift,
    optimizer_step,
    oscillation_omega1,
    oscillation_omega2,
    run_training,
    signsgd_step,
    steady_state_exponential_gains,
    sweep,
    tau_from_beta,
    tracking_check,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
