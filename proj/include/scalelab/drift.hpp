#pragma once

#include "scalelab/flow.hpp"
#include "scalelab/signal.hpp"

#include <cmath>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

namespace scalelab {

/// delta(t) = g'(t) / g(t) per coordinate. Throws DomainError if a coordinate of g(t) is zero.
std::vector<double> log_drift(const GradientSignal& signal, double t);
/// Same quantity from a central difference of g with step fd_step(t), whatever the signal kind.
std::vector<double> log_drift_fd(const GradientSignal& signal, double t);
/// delta'(t) = g''/g - delta^2 per coordinate.
std::vector<double> log_drift_derivative(const GradientSignal& signal, double t);

/// Lambda = sup ||delta||_inf and Lambda' = sup ||delta'||_inf over [t0, t1], 1% inflated.
struct DriftProfile {
    double lambda_bound = 0.0;
    double lambda_prime_bound = 0.0;
    double t0 = 0.0;
    double t1 = 0.0;

    /// Lambda^2 + Lambda', the size of the first-order remainders.
    double remainder_scale() const { return lambda_bound * lambda_bound + lambda_prime_bound; }
};

inline constexpr std::size_t kDriftSamples = 10001;
inline constexpr double kDriftInflation = 1.01;

DriftProfile drift_bounds(const GradientSignal& signal, double t0, double t1, std::size_t samples = kDriftSamples);

struct FirstOrderPrediction {
    std::vector<double> m;  ///< g (1 - tau1 delta)
    std::vector<double> v;  ///< g^2 (1 - 2 tau2 delta)
    std::vector<double> r;  ///< sign(g) (1 + (tau2 - tau1) delta)
};

/// Valid once t - t0 is past the burn-in window; evaluated pointwise at t.
FirstOrderPrediction predict_first_order(const GradientSignal& signal, const TimeScales& ts, double t);

enum class Channel { m, v, r };
std::string_view to_string(Channel c);

struct ChannelRemainder {
    Channel channel = Channel::m;
    /// sup over post-burn-in samples and coordinates of |actual - predicted|.
    double max_abs_remainder = 0.0;
    /// Explicit a-priori bound for m and v; NaN for R, whose constant has no closed form.
    double bound = std::numeric_limits<double>::quiet_NaN();
    /// max_abs_remainder / (Lambda^2 + Lambda'); NaN when the drift vanishes.
    double measured_constant = std::numeric_limits<double>::quiet_NaN();
    /// Slope of log remainder against log Lambda across a drift sweep; set by fit_remainder_order.
    double fitted_order = std::numeric_limits<double>::quiet_NaN();
};

struct RemainderReport {
    double delta0 = std::numeric_limits<double>::quiet_NaN();  ///< Label for drift sweeps.
    DriftProfile drift;
    ChannelRemainder m{Channel::m};
    ChannelRemainder v{Channel::v};
    ChannelRemainder r{Channel::r};
    std::size_t samples_used = 0;

    const ChannelRemainder& channel(Channel c) const { return c == Channel::m ? m : (c == Channel::v ? v : r); }
    ChannelRemainder& channel(Channel c) { return c == Channel::m ? m : (c == Channel::v ? v : r); }
};

/**
 * Compares a flow trace with the first-order predictions on every sample
 * at least ts.burn_in() after the start of the trace.
 *
 * The m and v bounds are C (exp(-(t - t0)/tau) + tau^2 (Lambda^2 + Lambda'))
 * with C_m = |m(t0) - g(t0) + tau1 g(t0) delta(t0)| + sup|g| and
 * C_v = |v(t0) - g(t0)^2 + 2 tau2 g(t0)^2 delta(t0)| + 4 sup|g|^2, taken at
 * the first post-burn-in sample. Throws DomainError if no sample survives
 * the burn-in.
 */
RemainderReport measure_remainder(const FlowTrace& trace, const GradientSignal& signal, const TimeScales& ts);

/// Fills fitted_order on every channel from the log-log slope of remainder against Lambda.
void fit_remainder_order(std::span<RemainderReport> reports);

/// Least-squares slope of log|y| against log|x|. Throws DomainError with fewer than two points.
double loglog_slope(std::span<const double> x, std::span<const double> y);

struct TrackingResult {
    double max_residual = 0.0;    ///< sup |x - (y - tau y')|
    double transient_coeff = 0.0;  ///< |x0 - y(t0) + tau y'(t0)|
    double steady_bound = 0.0;     ///< tau^2 sup|y''| (1% inflated)
    /// min over samples of bound(t) + tolerance - |r(t)|; the tolerance absorbs integrator roundoff.
    double min_margin = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

/**
 * Integrates tau x' = -x + y with x(t0) = x0 over [t0, t1] and checks the
 * tracking estimate |r(t)| <= transient_coeff exp(-(t - t0)/tau) + tau^2 sup|y''|
 * at every sample. h <= 0 selects tau / 50.
 */
TrackingResult tracking_check(const ScalarSignal& y, double tau, double x0, double t0, double t1, double h = 0.0);

}  // namespace scalelab
