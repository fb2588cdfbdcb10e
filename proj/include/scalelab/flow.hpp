#pragma once

#include "scalelab/signal.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace scalelab {

/// tau = -dt / ln(beta). Throws DomainError unless 0 < beta < 1 and dt > 0.
double tau_from_beta(double beta, double dt);
/// beta = exp(-dt / tau). Throws DomainError unless tau > 0 and dt > 0.
double beta_from_tau(double tau, double dt);

/// Relaxation times of the two moment averages, the rescaled learning rate and the discretization step.
struct TimeScales {
    double tau1 = 1.0;
    double tau2 = 1.0;
    double eta_bar = 1.0;
    double dt = 0.01;

    static TimeScales from_betas(double beta1, double beta2, double dt, double eta_bar = 1.0);

    void validate() const;
    double beta1() const { return beta_from_tau(tau1, dt); }
    double beta2() const { return beta_from_tau(tau2, dt); }
    double tau_max() const { return tau1 > tau2 ? tau1 : tau2; }
    /// Transient window discarded before comparing against first-order predictions: 10 max(tau1, tau2).
    double burn_in() const { return 10.0 * tau_max(); }
    /// Default integrator step min(tau1, tau2) / 50.
    double default_step() const { return (tau1 < tau2 ? tau1 : tau2) / 50.0; }
};

struct FlowState {
    std::vector<double> m;
    std::vector<double> v;
    std::vector<double> theta;
    double t = 0.0;
    /// Set by steady_state_init when a first-order v estimate had to be floored to stay positive.
    bool v_clamped = false;

    static FlowState uniform(std::size_t dim, double m0, double v0, double t0 = 0.0);
    std::size_t dim() const noexcept { return m.size(); }
};

struct FlowDerivative {
    std::vector<double> dm;
    std::vector<double> dv;
    std::vector<double> dtheta;
};

/**
 * Right-hand side of the continuous-time Adam flow at state.t:
 * tau1 m' = g - m, tau2 v' = g^2 - v, theta' = -eta_bar m / sqrt(v).
 * Throws DomainError when some v_i <= 0.
 */
FlowDerivative flow_rhs(const FlowState& state, const GradientSignal& signal, const TimeScales& ts);

struct FlowSample {
    double t = 0.0;
    std::vector<double> m;
    std::vector<double> v;
    std::vector<double> r;
    std::vector<double> theta;

    double norm_r() const;
};

struct FlowTrace {
    std::vector<FlowSample> samples;
    TimeScales scales;
    std::string signal;
    double t0 = 0.0;
    double h = 0.0;
    std::size_t stride = 1;
};

/**
 * Classical fixed-step RK4 integration of the flow from init.t to t_end.
 *
 * The step is shrunk so that an integer number of steps lands on t_end.
 * A sample is recorded at init.t and after every `stride` steps. Throws
 * DomainError if v leaves the positive orthant at any stage.
 */
FlowTrace integrate_flow(const GradientSignal& signal, const TimeScales& ts, const FlowState& init, double t_end,
                         double h, std::size_t stride = 1);

/// Sampled solution of the scalar relaxation tau x' = -x + y(t).
struct TrackerTrace {
    std::vector<double> t;
    std::vector<double> x;
};

TrackerTrace integrate_tracker(const ScalarSignal& y, double tau, double x0, double t0, double t_end, double h);

struct ExponentialGains {
    double m = 1.0;
    double v = 1.0;
    double r = 1.0;
};

/**
 * Exact asymptotic ratios m/g, v/g^2 and R/sign(g) of the flow driven by
 * g(t) = c exp(delta0 t): 1/(1 + tau1 delta0), 1/(1 + 2 tau2 delta0) and
 * their quotient m_gain / sqrt(v_gain). Throws DomainError past either pole.
 */
ExponentialGains steady_state_exponential_gains(double delta0, const TimeScales& ts);

/**
 * First-order tracking state at t0: m = g (1 - tau1 delta), v = g^2 (1 - 2 tau2 delta).
 * v is floored at 1e-6 g^2 (flagging v_clamped); theta = 0. Throws
 * DomainError when a coordinate of g(t0) is zero.
 */
FlowState steady_state_init(const GradientSignal& signal, const TimeScales& ts, double t0);

}  // namespace scalelab
