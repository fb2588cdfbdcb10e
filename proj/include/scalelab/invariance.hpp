#pragma once

#include "scalelab/flow.hpp"
#include "scalelab/optimizer.hpp"
#include "scalelab/run_trace.hpp"
#include "scalelab/signal.hpp"

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace scalelab {

enum class Invariance { exact_invariant, scale_linear, other };
std::string_view to_string(Invariance c);

inline constexpr double kInvarianceThreshold = 1e-12;

struct RescaleProbeResult {
    std::vector<double> lambdas;
    /// ||R(lambda g) - R(g)||_inf for each lambda, with the state held fixed.
    std::vector<double> deviations;
    /// ||R(lambda g) - lambda R(g)||_inf for each lambda.
    std::vector<double> linear_deviations;
    UpdateVector base;
    std::vector<UpdateVector> rescaled;
    Invariance classification = Invariance::other;
};

/**
 * Evaluates the update direction of `method` at a frozen state for g and for
 * each lambda g. Exact-invariant when every deviation is below 1e-12,
 * scale-linear when every linear deviation is. Throws DomainError for a
 * nonpositive lambda.
 */
RescaleProbeResult exact_invariance_probe(Method method, const MomentState& state, std::span<const double> g,
                                          std::span<const double> lambdas, const OptimizerConfig& config = {});

struct SensitivityFit {
    std::vector<double> delta0;
    /// Steady R - 1 of the flow under g = exp(delta0 t), signed.
    std::vector<double> deviations;
    /// Log-log slope of |deviation| against delta0.
    double slope = 0.0;
    /// deviation / delta0 extrapolated linearly to delta0 -> 0 (signed; tau2 - tau1 in theory).
    double coefficient = 0.0;
};

/**
 * Integrates the flow for g(t) = exp(delta0 t) from the first-order steady
 * state, reads R after 15 max(tau) and fits the drift dependence. Throws
 * DomainError for fewer than 3 grid points or a drift past a pole.
 */
SensitivityFit first_order_sensitivity(const TimeScales& ts, std::span<const double> delta0_grid);

struct StepScaleExperiment {
    GradientSignal base_signal = GradientSignal::uniform(ScalarSignal::constant(1.0));
    /// (first step, multiplier) segments in increasing step order; steps before the first use multiplier 1.
    std::vector<std::pair<std::uint64_t, double>> scale_factors;
    /// Gradient k is base_signal(k * dt) times the active multiplier.
    double dt = 1.0;
    /// Start from m = g_0, v = g_0^2 instead of zero moments.
    bool steady_init = true;
};

/// Feeds the multiplied gradient stream to the discrete optimizer and records ||R_k||_2 and the multiplier.
RunTrace run_step_scale_experiment(const StepScaleExperiment& exp, const OptimizerConfig& config, std::size_t steps);

struct TransientSummary {
    double beta1 = 0.0;
    double beta2 = 0.0;
    double reference = 0.0;           ///< ||R|| on the step before the jump
    double transient_integral = 0.0;  ///< sum over k >= jump of | ||R_k|| - reference |
    double peak_excursion = 0.0;      ///< max over k >= jump of | ||R_k|| - reference |
    double final_norm = 0.0;
};

TransientSummary summarize_transient(const RunTrace& trace, std::uint64_t jump_step);

/// Runs the experiment for every (beta1, beta2) on the axis and summarizes the transient after `jump_step`.
std::vector<TransientSummary> step_scale_grid(const StepScaleExperiment& exp, const OptimizerConfig& base,
                                              std::span<const double> beta_axis, std::size_t steps,
                                              std::uint64_t jump_step, std::size_t threads = 0);

}  // namespace scalelab
