#include "scalelab/invariance.hpp"

#include "scalelab/drift.hpp"
#include "scalelab/error.hpp"
#include "scalelab/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace scalelab {

std::string_view to_string(Invariance c) {
    switch (c) {
        case Invariance::exact_invariant: return "exact-invariant";
        case Invariance::scale_linear: return "scale-linear";
        case Invariance::other: return "other";
    }
    return "other";
}

RescaleProbeResult exact_invariance_probe(Method method, const MomentState& state, std::span<const double> g,
                                          std::span<const double> lambdas, const OptimizerConfig& config) {
    for (double l : lambdas) {
        if (!(l > 0.0)) throw DomainError("rescale probe: lambda must be positive");
    }
    RescaleProbeResult res;
    res.lambdas.assign(lambdas.begin(), lambdas.end());
    res.base = update_direction(method, state, g, config);
    std::vector<double> scaled(g.size());
    double max_dev = 0.0;
    double max_lin = 0.0;
    for (double l : lambdas) {
        for (std::size_t i = 0; i < g.size(); ++i) scaled[i] = l * g[i];
        UpdateVector r = update_direction(method, state, scaled, config);
        double dev = 0.0;
        double lin = 0.0;
        for (std::size_t i = 0; i < r.r.size(); ++i) {
            dev = std::max(dev, std::abs(r.r[i] - res.base.r[i]));
            lin = std::max(lin, std::abs(r.r[i] - l * res.base.r[i]));
        }
        res.deviations.push_back(dev);
        res.linear_deviations.push_back(lin);
        res.rescaled.push_back(std::move(r));
        max_dev = std::max(max_dev, dev);
        max_lin = std::max(max_lin, lin);
    }
    if (max_dev < kInvarianceThreshold)
        res.classification = Invariance::exact_invariant;
    else if (max_lin < kInvarianceThreshold)
        res.classification = Invariance::scale_linear;
    else
        res.classification = Invariance::other;
    return res;
}

SensitivityFit first_order_sensitivity(const TimeScales& ts, std::span<const double> delta0_grid) {
    ts.validate();
    if (delta0_grid.size() < 3) throw DomainError("first_order_sensitivity: need at least 3 drift values");
    SensitivityFit fit;
    const double h = ts.default_step();
    const double t_end = 1.5 * ts.burn_in();
    for (double d0 : delta0_grid) {
        if (d0 == 0.0) throw DomainError("first_order_sensitivity: zero drift has no log-log fit");
        steady_state_exponential_gains(d0, ts);  // pole check
        const auto signal = GradientSignal::uniform(ScalarSignal::exponential(1.0, d0));
        const auto trace = integrate_flow(signal, ts, steady_state_init(signal, ts, 0.0), t_end, h);
        fit.delta0.push_back(d0);
        fit.deviations.push_back(trace.samples.back().r[0] - 1.0);
    }
    fit.slope = loglog_slope(fit.delta0, fit.deviations);

    // Linear least squares of deviation / delta0 against delta0; the intercept is the first-order coefficient.
    const auto n = static_cast<double>(fit.delta0.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < fit.delta0.size(); ++i) {
        mx += fit.delta0[i];
        my += fit.deviations[i] / fit.delta0[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < fit.delta0.size(); ++i) {
        const double dx = fit.delta0[i] - mx;
        sxy += dx * (fit.deviations[i] / fit.delta0[i] - my);
        sxx += dx * dx;
    }
    if (sxx == 0.0) throw DomainError("first_order_sensitivity: drift grid values coincide");
    fit.coefficient = my - (sxy / sxx) * mx;
    return fit;
}

namespace {

std::vector<double> multipliers_for(const StepScaleExperiment& exp, std::size_t steps) {
    std::vector<double> mult(steps, 1.0);
    std::uint64_t prev = 0;
    for (std::size_t j = 0; j < exp.scale_factors.size(); ++j) {
        const auto [start, factor] = exp.scale_factors[j];
        if (!(factor > 0.0)) throw DomainError("step-scale: multipliers must be positive");
        if (j > 0 && start <= prev) throw DomainError("step-scale: segment shorter than one step");
        if (start >= steps) throw DomainError("step-scale: segment starts after the last step");
        prev = start;
        const std::uint64_t end = j + 1 < exp.scale_factors.size() ? exp.scale_factors[j + 1].first : steps;
        for (std::uint64_t k = start; k < std::min<std::uint64_t>(end, steps); ++k) mult[k] = factor;
    }
    return mult;
}

}  // namespace

RunTrace run_step_scale_experiment(const StepScaleExperiment& exp, const OptimizerConfig& config, std::size_t steps) {
    if (steps < 1) throw DomainError("step-scale: steps must be at least 1");
    if (!(exp.dt > 0.0)) throw DomainError("step-scale: dt must be positive");
    config.validate();
    const auto mult = multipliers_for(exp, steps);
    const std::size_t d = exp.base_signal.dim();

    auto gradient = [&](std::size_t k) {
        auto g = exp.base_signal.value(static_cast<double>(k) * exp.dt);
        for (double& x : g) x *= mult[k];
        return g;
    };

    MomentState state = exp.steady_init ? MomentState::steady(gradient(0)) : MomentState::zeros(d);
    RunTrace trace;
    trace.config = config;
    trace.problem = "step-scale:" + exp.base_signal.describe();
    trace.step.reserve(steps);
    trace.multiplier.reserve(steps);
    trace.norm_r.reserve(steps);
    for (std::size_t k = 0; k < steps; ++k) {
        const auto g = gradient(k);
        StepResult next = optimizer_step(state, g, config);
        trace.step.push_back(k);
        trace.multiplier.push_back(mult[k]);
        trace.norm_r.push_back(next.update.norm2());
        state = std::move(next.state);
    }
    return trace;
}

TransientSummary summarize_transient(const RunTrace& trace, std::uint64_t jump_step) {
    if (jump_step == 0 || jump_step >= trace.size()) throw DomainError("transient summary: jump outside the trace");
    TransientSummary s;
    s.beta1 = trace.config.beta1;
    s.beta2 = trace.config.beta2;
    s.reference = trace.norm_r[jump_step - 1];
    for (std::size_t k = jump_step; k < trace.size(); ++k) {
        const double e = std::abs(trace.norm_r[k] - s.reference);
        s.transient_integral += e;
        s.peak_excursion = std::max(s.peak_excursion, e);
    }
    s.final_norm = trace.norm_r.back();
    return s;
}

std::vector<TransientSummary> step_scale_grid(const StepScaleExperiment& exp, const OptimizerConfig& base,
                                              std::span<const double> beta_axis, std::size_t steps,
                                              std::uint64_t jump_step, std::size_t threads) {
    const std::size_t nb = beta_axis.size();
    std::vector<TransientSummary> out(nb * nb);
    parallel_for(
        out.size(),
        [&](std::size_t idx) {
            OptimizerConfig cfg = base;
            cfg.beta1 = beta_axis[idx / nb];
            cfg.beta2 = beta_axis[idx % nb];
            out[idx] = summarize_transient(run_step_scale_experiment(exp, cfg, steps), jump_step);
        },
        threads);
    return out;
}

}  // namespace scalelab
