#include "scalelab/optimizer.hpp"

#include "scalelab/error.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace scalelab {

std::string_view to_string(Method method) {
    switch (method) {
        case Method::adam: return "adam";
        case Method::signsgd: return "signsgd";
        case Method::gd: return "gd";
    }
    return "unknown";
}

Method parse_method(std::string_view name) {
    if (name == "adam" || name == "adamw") return Method::adam;
    if (name == "signsgd" || name == "sign") return Method::signsgd;
    if (name == "gd" || name == "sgd") return Method::gd;
    throw std::invalid_argument("unknown optimizer method '" + std::string(name) + "'");
}

void OptimizerConfig::validate() const {
    if (!(beta1 > 0.0 && beta1 < 1.0)) throw DomainError("beta1 must lie in (0, 1)");
    if (!(beta2 > 0.0 && beta2 < 1.0)) throw DomainError("beta2 must lie in (0, 1)");
    if (!(epsilon >= 0.0)) throw DomainError("epsilon must be nonnegative");
    if (!(eta >= 0.0)) throw DomainError("eta must be nonnegative");
    if (!(weight_decay >= 0.0)) throw DomainError("weight_decay must be nonnegative");
}

MomentState MomentState::zeros(std::size_t dim) {
    return MomentState{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0),
                       std::vector<double>(dim, 0.0), 0};
}

MomentState MomentState::at(std::vector<double> theta) {
    const auto d = theta.size();
    return MomentState{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0), std::move(theta), 0};
}

MomentState MomentState::steady(std::span<const double> g, std::vector<double> theta) {
    if (theta.empty()) theta.assign(g.size(), 0.0);
    if (theta.size() != g.size()) throw StructuralError("steady state: theta and g differ in length");
    MomentState s{std::vector<double>(g.begin(), g.end()), std::vector<double>(g.size()), std::move(theta), 0};
    std::transform(g.begin(), g.end(), s.v.begin(), [](double x) { return x * x; });
    return s;
}

void MomentState::check() const {
    if (m.size() != theta.size() || v.size() != theta.size())
        throw StructuralError("moment state: m, v and theta differ in length");
}

double UpdateVector::norm2() const {
    double s = 0.0;
    for (double x : r) s += x * x;
    return std::sqrt(s);
}

double UpdateVector::norm_inf() const {
    double s = 0.0;
    for (double x : r) s = std::max(s, std::abs(x));
    return s;
}

namespace {

void check_gradient(const MomentState& state, std::span<const double> g) {
    state.check();
    if (g.size() != state.dim())
        throw StructuralError("gradient has " + std::to_string(g.size()) + " coordinates, state has " +
                              std::to_string(state.dim()));
}

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

void apply_parameter_step(MomentState& s, const UpdateVector& u, const OptimizerConfig& config) {
    for (std::size_t i = 0; i < s.theta.size(); ++i) s.theta[i] -= config.eta * u.r[i];
    if (config.weight_decay > 0.0) {
        const double shrink = 1.0 - config.eta * config.weight_decay;
        for (double& t : s.theta) t *= shrink;
    }
}

// Moments and direction; parameters untouched, k not advanced.
UpdateVector adam_moments(MomentState& s, std::span<const double> g, const OptimizerConfig& config) {
    const double b1 = config.beta1;
    const double b2 = config.beta2;
    double c1 = 1.0;
    double c2 = 1.0;
    if (config.bias_correction) {
        const auto next = static_cast<double>(s.k + 1);
        c1 = 1.0 - std::pow(b1, next);
        c2 = 1.0 - std::pow(b2, next);
    }
    UpdateVector u{std::vector<double>(g.size())};
    for (std::size_t i = 0; i < g.size(); ++i) {
        s.m[i] = b1 * s.m[i] + (1.0 - b1) * g[i];
        s.v[i] = b2 * s.v[i] + (1.0 - b2) * g[i] * g[i];
        const double denom = std::sqrt(s.v[i] / c2) + config.epsilon;
        if (denom == 0.0)
            throw DomainError("adam: zero second moment at coordinate " + std::to_string(i) + " with epsilon = 0");
        u.r[i] = (s.m[i] / c1) / denom;
    }
    return u;
}

}  // namespace

StepResult adam_step(const MomentState& state, std::span<const double> g, const OptimizerConfig& config) {
    check_gradient(state, g);
    config.validate();
    StepResult out{state, {}};
    out.update = adam_moments(out.state, g, config);
    apply_parameter_step(out.state, out.update, config);
    ++out.state.k;
    return out;
}

UpdateVector signsgd_step(std::span<const double> g) {
    UpdateVector u{std::vector<double>(g.size())};
    std::transform(g.begin(), g.end(), u.r.begin(), sign);
    return u;
}

UpdateVector gd_step(std::span<const double> g) { return UpdateVector{std::vector<double>(g.begin(), g.end())}; }

UpdateVector update_direction(Method method, const MomentState& state, std::span<const double> g,
                              const OptimizerConfig& config) {
    switch (method) {
        case Method::signsgd: return signsgd_step(g);
        case Method::gd: return gd_step(g);
        case Method::adam: {
            check_gradient(state, g);
            config.validate();
            MomentState scratch = state;
            return adam_moments(scratch, g, config);
        }
    }
    throw std::logic_error("unreachable");
}

StepResult optimizer_step(const MomentState& state, std::span<const double> g, const OptimizerConfig& config) {
    if (config.method == Method::adam) return adam_step(state, g, config);
    check_gradient(state, g);
    StepResult out{state, config.method == Method::gd ? gd_step(g) : signsgd_step(g)};
    apply_parameter_step(out.state, out.update, config);
    ++out.state.k;
    return out;
}

double constant_gradient_closed_form(double c, std::uint64_t k, double beta1, double beta2) {
    if (k == 0) throw DomainError("closed form needs k >= 1");
    if (c == 0.0) throw DomainError("closed form needs c != 0");
    if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0))
        throw DomainError("betas must lie in (0, 1)");
    const auto kk = static_cast<double>(k);
    return sign(c) * (1.0 - std::pow(beta1, kk)) / std::sqrt(1.0 - std::pow(beta2, kk));
}

}  // namespace scalelab
