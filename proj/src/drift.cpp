#include "scalelab/drift.hpp"

#include "scalelab/error.hpp"

#include <algorithm>
#include <cmath>

namespace scalelab {

namespace {

double checked_value(const ScalarSignal& s, double t, std::size_t i) {
    const double g = s.value(t);
    if (g == 0.0) throw DomainError("log drift undefined: g[" + std::to_string(i) + "] = 0");
    return g;
}

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

double sample_time(double t0, double t1, std::size_t j, std::size_t n) {
    return n < 2 ? t0 : t0 + (t1 - t0) * static_cast<double>(j) / static_cast<double>(n - 1);
}

}  // namespace

std::vector<double> log_drift(const GradientSignal& signal, double t) {
    std::vector<double> out(signal.dim());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto& s = signal.coord(i);
        out[i] = s.derivative(t) / checked_value(s, t, i);
    }
    return out;
}

std::vector<double> log_drift_fd(const GradientSignal& signal, double t) {
    std::vector<double> out(signal.dim());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto& s = signal.coord(i);
        out[i] = s.fd_derivative(t) / checked_value(s, t, i);
    }
    return out;
}

std::vector<double> log_drift_derivative(const GradientSignal& signal, double t) {
    std::vector<double> out(signal.dim());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto& s = signal.coord(i);
        const double g = checked_value(s, t, i);
        const double delta = s.derivative(t) / g;
        out[i] = s.second_derivative(t) / g - delta * delta;
    }
    return out;
}

DriftProfile drift_bounds(const GradientSignal& signal, double t0, double t1, std::size_t samples) {
    if (t1 < t0) throw DomainError("drift_bounds: empty interval");
    samples = std::max<std::size_t>(samples, 2);
    DriftProfile p{0.0, 0.0, t0, t1};
    for (std::size_t j = 0; j < samples; ++j) {
        const double t = sample_time(t0, t1, j, samples);
        for (double d : log_drift(signal, t)) p.lambda_bound = std::max(p.lambda_bound, std::abs(d));
        for (double d : log_drift_derivative(signal, t))
            p.lambda_prime_bound = std::max(p.lambda_prime_bound, std::abs(d));
    }
    p.lambda_bound *= kDriftInflation;
    p.lambda_prime_bound *= kDriftInflation;
    return p;
}

FirstOrderPrediction predict_first_order(const GradientSignal& signal, const TimeScales& ts, double t) {
    ts.validate();
    const auto g = signal.value(t);
    const auto delta = log_drift(signal, t);
    FirstOrderPrediction p{std::vector<double>(g.size()), std::vector<double>(g.size()),
                           std::vector<double>(g.size())};
    for (std::size_t i = 0; i < g.size(); ++i) {
        p.m[i] = g[i] * (1.0 - ts.tau1 * delta[i]);
        p.v[i] = g[i] * g[i] * (1.0 - 2.0 * ts.tau2 * delta[i]);
        p.r[i] = sign(g[i]) * (1.0 + (ts.tau2 - ts.tau1) * delta[i]);
    }
    return p;
}

std::string_view to_string(Channel c) {
    switch (c) {
        case Channel::m: return "m";
        case Channel::v: return "v";
        case Channel::r: return "R";
    }
    return "?";
}

RemainderReport measure_remainder(const FlowTrace& trace, const GradientSignal& signal, const TimeScales& ts) {
    ts.validate();
    if (trace.samples.empty()) throw DomainError("measure_remainder: empty trace");
    const double t_start = trace.samples.front().t;
    const double t_end = trace.samples.back().t;
    const double cutoff = t_start + ts.burn_in();

    RemainderReport rep;
    rep.drift = drift_bounds(signal, t_start, t_end);
    const double scale = rep.drift.remainder_scale();

    double first_t = std::numeric_limits<double>::quiet_NaN();
    for (const auto& s : trace.samples) {
        if (s.t < cutoff - 1e-9 * std::max(1.0, std::abs(cutoff))) continue;
        if (rep.samples_used++ == 0) first_t = s.t;
        const auto pred = predict_first_order(signal, ts, s.t);
        for (std::size_t i = 0; i < pred.m.size(); ++i) {
            rep.m.max_abs_remainder = std::max(rep.m.max_abs_remainder, std::abs(s.m[i] - pred.m[i]));
            rep.v.max_abs_remainder = std::max(rep.v.max_abs_remainder, std::abs(s.v[i] - pred.v[i]));
            rep.r.max_abs_remainder = std::max(rep.r.max_abs_remainder, std::abs(s.r[i] - pred.r[i]));
        }
    }
    if (rep.samples_used == 0) throw DomainError("measure_remainder: no samples after the burn-in window");

    // sup|g_i| by the same dense sampling as the drift bounds.
    const std::size_t d = signal.dim();
    std::vector<double> sup_g(d, 0.0);
    for (std::size_t j = 0; j < kDriftSamples; ++j) {
        const auto g = signal.value(sample_time(t_start, t_end, j, kDriftSamples));
        for (std::size_t i = 0; i < d; ++i) sup_g[i] = std::max(sup_g[i], std::abs(g[i]));
    }
    const auto& init = trace.samples.front();
    const auto g0 = signal.value(t_start);
    const auto delta0 = log_drift(signal, t_start);
    const double elapsed = first_t - t_start;
    double bound_m = 0.0;
    double bound_v = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        const double b = sup_g[i] * kDriftInflation;
        const double cm = std::abs(init.m[i] - g0[i] + ts.tau1 * g0[i] * delta0[i]) + b;
        const double cv = std::abs(init.v[i] - g0[i] * g0[i] + 2.0 * ts.tau2 * g0[i] * g0[i] * delta0[i]) + 4.0 * b * b;
        bound_m = std::max(bound_m, cm * (std::exp(-elapsed / ts.tau1) + ts.tau1 * ts.tau1 * scale));
        bound_v = std::max(bound_v, cv * (std::exp(-elapsed / ts.tau2) + ts.tau2 * ts.tau2 * scale));
    }
    rep.m.bound = bound_m;
    rep.v.bound = bound_v;
    if (scale > 0.0) {
        for (Channel c : {Channel::m, Channel::v, Channel::r})
            rep.channel(c).measured_constant = rep.channel(c).max_abs_remainder / scale;
    }
    return rep;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw StructuralError("loglog_slope: x and y differ in length");
    if (x.size() < 2) throw DomainError("loglog_slope: need at least two points");
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(std::abs(x[i]));
        my += std::log(std::abs(y[i]));
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(std::abs(x[i])) - mx;
        sxy += dx * (std::log(std::abs(y[i])) - my);
        sxx += dx * dx;
    }
    if (sxx == 0.0) throw DomainError("loglog_slope: all x coincide");
    return sxy / sxx;
}

void fit_remainder_order(std::span<RemainderReport> reports) {
    if (reports.size() < 2) throw DomainError("fit_remainder_order: need at least two reports");
    std::vector<double> lambda;
    for (const auto& r : reports) lambda.push_back(r.drift.lambda_bound);
    for (Channel c : {Channel::m, Channel::v, Channel::r}) {
        std::vector<double> rem;
        for (const auto& r : reports) rem.push_back(r.channel(c).max_abs_remainder);
        const bool usable = std::all_of(rem.begin(), rem.end(), [](double v) { return v > 0.0; }) &&
                            std::all_of(lambda.begin(), lambda.end(), [](double v) { return v > 0.0; });
        const double slope = usable ? loglog_slope(lambda, rem) : std::numeric_limits<double>::quiet_NaN();
        for (auto& r : reports) r.channel(c).fitted_order = slope;
    }
}

TrackingResult tracking_check(const ScalarSignal& y, double tau, double x0, double t0, double t1, double h) {
    if (!(tau > 0.0)) throw DomainError("tracking_check: tau must be positive");
    if (h <= 0.0) h = tau / 50.0;
    const auto trace = integrate_tracker(y, tau, x0, t0, t1, h);

    double sup_y2 = 0.0;
    double sup_y = 0.0;
    for (std::size_t j = 0; j < kDriftSamples; ++j) {
        const double t = sample_time(t0, t1, j, kDriftSamples);
        sup_y2 = std::max(sup_y2, std::abs(y.second_derivative(t)));
        sup_y = std::max(sup_y, std::abs(y.value(t)));
    }
    TrackingResult res;
    res.transient_coeff = std::abs(x0 - y.value(t0) + tau * y.derivative(t0));
    res.steady_bound = tau * tau * sup_y2 * kDriftInflation;
    res.tolerance = 1e-9 * std::max(1.0, sup_y);
    res.min_margin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < trace.t.size(); ++j) {
        const double t = trace.t[j];
        const double r = trace.x[j] - (y.value(t) - tau * y.derivative(t));
        const double bound = res.transient_coeff * std::exp(-(t - t0) / tau) + res.steady_bound;
        res.max_residual = std::max(res.max_residual, std::abs(r));
        res.min_margin = std::min(res.min_margin, bound + res.tolerance - std::abs(r));
    }
    res.pass = res.min_margin >= 0.0;
    return res;
}

}  // namespace scalelab
