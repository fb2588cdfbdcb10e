#include "scalelab/flow.hpp"

#include "scalelab/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace scalelab {

double tau_from_beta(double beta, double dt) {
    if (!(beta > 0.0 && beta < 1.0)) throw DomainError("tau_from_beta: beta must lie in (0, 1)");
    if (!(dt > 0.0)) throw DomainError("tau_from_beta: dt must be positive");
    return -dt / std::log(beta);
}

double beta_from_tau(double tau, double dt) {
    if (!(tau > 0.0)) throw DomainError("beta_from_tau: tau must be positive");
    if (!(dt > 0.0)) throw DomainError("beta_from_tau: dt must be positive");
    return std::exp(-dt / tau);
}

TimeScales TimeScales::from_betas(double beta1, double beta2, double dt, double eta_bar) {
    return TimeScales{tau_from_beta(beta1, dt), tau_from_beta(beta2, dt), eta_bar, dt};
}

void TimeScales::validate() const {
    if (!(tau1 > 0.0) || !(tau2 > 0.0)) throw DomainError("time scales: tau1 and tau2 must be positive");
    if (!(eta_bar > 0.0)) throw DomainError("time scales: eta_bar must be positive");
    if (!(dt > 0.0)) throw DomainError("time scales: dt must be positive");
}

FlowState FlowState::uniform(std::size_t dim, double m0, double v0, double t0) {
    return FlowState{std::vector<double>(dim, m0), std::vector<double>(dim, v0), std::vector<double>(dim, 0.0), t0,
                     false};
}

double FlowSample::norm_r() const {
    double s = 0.0;
    for (double x : r) s += x * x;
    return std::sqrt(s);
}

namespace {

[[noreturn]] void nonpositive_v(double t, std::size_t i, double v) {
    std::ostringstream os;
    os << "flow: v[" << i << "] = " << v << " <= 0 at t = " << t
       << " (gradient coordinate too close to zero for the expansion)";
    throw DomainError(os.str());
}

// Packed state y = [m, v, theta]; writes dy/dt.
void packed_rhs(const GradientSignal& signal, const TimeScales& ts, double t, const std::vector<double>& y,
                std::vector<double>& dy) {
    const std::size_t d = signal.dim();
    for (std::size_t i = 0; i < d; ++i) {
        const double g = signal.coord(i).value(t);
        const double m = y[i];
        const double v = y[d + i];
        if (!(v > 0.0)) nonpositive_v(t, i, v);
        dy[i] = (g - m) / ts.tau1;
        dy[d + i] = (g * g - v) / ts.tau2;
        dy[2 * d + i] = -ts.eta_bar * m / std::sqrt(v);
    }
}

template <class Rhs>
void rk4_step(Rhs&& rhs, double t, double h, std::vector<double>& y, std::vector<double> (&k)[4],
              std::vector<double>& tmp) {
    const std::size_t n = y.size();
    rhs(t, y, k[0]);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = y[j] + 0.5 * h * k[0][j];
    rhs(t + 0.5 * h, tmp, k[1]);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = y[j] + 0.5 * h * k[1][j];
    rhs(t + 0.5 * h, tmp, k[2]);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = y[j] + h * k[2][j];
    rhs(t + h, tmp, k[3]);
    for (std::size_t j = 0; j < n; ++j) y[j] += h / 6.0 * (k[0][j] + 2.0 * k[1][j] + 2.0 * k[2][j] + k[3][j]);
}

std::size_t step_count(double t0, double t_end, double h) {
    if (!(h > 0.0)) throw DomainError("integrator step must be positive");
    if (!(t_end > t0)) throw DomainError("integration end must lie after the start time");
    const double n = std::ceil((t_end - t0) / h - 1e-9);
    return static_cast<std::size_t>(std::max(1.0, n));
}

FlowSample make_sample(double t, const std::vector<double>& y, std::size_t d) {
    FlowSample s;
    s.t = t;
    s.m.assign(y.begin(), y.begin() + static_cast<long>(d));
    s.v.assign(y.begin() + static_cast<long>(d), y.begin() + static_cast<long>(2 * d));
    s.theta.assign(y.begin() + static_cast<long>(2 * d), y.end());
    s.r.resize(d);
    for (std::size_t i = 0; i < d; ++i) s.r[i] = s.m[i] / std::sqrt(s.v[i]);
    return s;
}

}  // namespace

FlowDerivative flow_rhs(const FlowState& state, const GradientSignal& signal, const TimeScales& ts) {
    ts.validate();
    const std::size_t d = state.dim();
    if (state.v.size() != d || signal.dim() != d)
        throw StructuralError("flow_rhs: state and signal dimensions disagree");
    std::vector<double> y(3 * d);
    std::copy(state.m.begin(), state.m.end(), y.begin());
    std::copy(state.v.begin(), state.v.end(), y.begin() + static_cast<long>(d));
    std::vector<double> dy(3 * d);
    packed_rhs(signal, ts, state.t, y, dy);
    return FlowDerivative{{dy.begin(), dy.begin() + static_cast<long>(d)},
                          {dy.begin() + static_cast<long>(d), dy.begin() + static_cast<long>(2 * d)},
                          {dy.begin() + static_cast<long>(2 * d), dy.end()}};
}

FlowTrace integrate_flow(const GradientSignal& signal, const TimeScales& ts, const FlowState& init, double t_end,
                         double h, std::size_t stride) {
    ts.validate();
    const std::size_t d = init.dim();
    if (d == 0 || init.v.size() != d || signal.dim() != d)
        throw StructuralError("integrate_flow: state and signal dimensions disagree");
    if (stride == 0) throw DomainError("integrate_flow: stride must be positive");
    const std::size_t n = step_count(init.t, t_end, h);
    const double step = (t_end - init.t) / static_cast<double>(n);

    std::vector<double> y(3 * d);
    std::copy(init.m.begin(), init.m.end(), y.begin());
    std::copy(init.v.begin(), init.v.end(), y.begin() + static_cast<long>(d));
    if (init.theta.size() == d) std::copy(init.theta.begin(), init.theta.end(), y.begin() + static_cast<long>(2 * d));
    for (std::size_t i = 0; i < d; ++i) {
        if (!(init.v[i] > 0.0)) nonpositive_v(init.t, i, init.v[i]);
    }

    FlowTrace trace;
    trace.scales = ts;
    trace.signal = signal.describe();
    trace.t0 = init.t;
    trace.h = step;
    trace.stride = stride;
    trace.samples.reserve(n / stride + 1);
    trace.samples.push_back(make_sample(init.t, y, d));

    std::vector<double> k[4] = {std::vector<double>(3 * d), std::vector<double>(3 * d), std::vector<double>(3 * d),
                                std::vector<double>(3 * d)};
    std::vector<double> tmp(3 * d);
    auto rhs = [&](double t, const std::vector<double>& state, std::vector<double>& out) {
        packed_rhs(signal, ts, t, state, out);
    };
    for (std::size_t s = 0; s < n; ++s) {
        const double t = init.t + static_cast<double>(s) * step;
        rk4_step(rhs, t, step, y, k, tmp);
        if ((s + 1) % stride == 0) {
            const double tn = init.t + static_cast<double>(s + 1) * step;
            for (std::size_t i = 0; i < d; ++i) {
                if (!(y[d + i] > 0.0)) nonpositive_v(tn, i, y[d + i]);
            }
            trace.samples.push_back(make_sample(tn, y, d));
        }
    }
    return trace;
}

TrackerTrace integrate_tracker(const ScalarSignal& y, double tau, double x0, double t0, double t_end, double h) {
    if (!(tau > 0.0)) throw DomainError("tracker: tau must be positive");
    const std::size_t n = step_count(t0, t_end, h);
    const double step = (t_end - t0) / static_cast<double>(n);
    TrackerTrace out;
    out.t.reserve(n + 1);
    out.x.reserve(n + 1);
    std::vector<double> state{x0};
    std::vector<double> k[4] = {std::vector<double>(1), std::vector<double>(1), std::vector<double>(1),
                                std::vector<double>(1)};
    std::vector<double> tmp(1);
    auto rhs = [&](double t, const std::vector<double>& x, std::vector<double>& dx) {
        dx[0] = (y.value(t) - x[0]) / tau;
    };
    out.t.push_back(t0);
    out.x.push_back(x0);
    for (std::size_t s = 0; s < n; ++s) {
        rk4_step(rhs, t0 + static_cast<double>(s) * step, step, state, k, tmp);
        out.t.push_back(t0 + static_cast<double>(s + 1) * step);
        out.x.push_back(state[0]);
    }
    return out;
}

ExponentialGains steady_state_exponential_gains(double delta0, const TimeScales& ts) {
    ts.validate();
    const double dm = 1.0 + ts.tau1 * delta0;
    const double dv = 1.0 + 2.0 * ts.tau2 * delta0;
    if (!(dm > 0.0) || !(dv > 0.0))
        throw DomainError("steady-state gains: drift crosses the pole 1 + tau delta0 <= 0");
    ExponentialGains g;
    g.m = 1.0 / dm;
    g.v = 1.0 / dv;
    g.r = g.m / std::sqrt(g.v);
    return g;
}

FlowState steady_state_init(const GradientSignal& signal, const TimeScales& ts, double t0) {
    ts.validate();
    const std::size_t d = signal.dim();
    FlowState s = FlowState::uniform(d, 0.0, 0.0, t0);
    for (std::size_t i = 0; i < d; ++i) {
        const double g = signal.coord(i).value(t0);
        if (g == 0.0)
            throw DomainError("steady_state_init: gradient coordinate " + std::to_string(i) + " vanishes at t0");
        const double delta = signal.coord(i).derivative(t0) / g;
        s.m[i] = g * (1.0 - ts.tau1 * delta);
        const double floor = 1e-6 * g * g;
        const double v = g * g * (1.0 - 2.0 * ts.tau2 * delta);
        if (v < floor) {
            s.v[i] = floor;
            s.v_clamped = true;
        } else {
            s.v[i] = v;
        }
    }
    return s;
}

}  // namespace scalelab
