#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace scalelab {

enum class Method { adam, signsgd, gd };

std::string_view to_string(Method method);
/// Parses "adam", "signsgd" or "gd". Throws std::invalid_argument otherwise.
Method parse_method(std::string_view name);

/**
 * Hyperparameters of the discrete optimizers.
 *
 * `weight_decay > 0` switches Adam to decoupled (AdamW) decay. `method`
 * selects which update rule `optimizer_step` applies; signSGD and GD only
 * use `eta` and `weight_decay`.
 */
struct OptimizerConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eta = 1e-3;
    double epsilon = 1e-8;
    bool bias_correction = false;
    double weight_decay = 0.0;
    Method method = Method::adam;

    /// Throws DomainError unless 0 < beta < 1, epsilon >= 0, eta >= 0 and weight_decay >= 0.
    void validate() const;
};

/// Per-coordinate moments, parameters and the number of steps taken.
struct MomentState {
    std::vector<double> m;
    std::vector<double> v;
    std::vector<double> theta;
    std::uint64_t k = 0;

    static MomentState zeros(std::size_t dim);
    /// Zero moments with the given starting parameters.
    static MomentState at(std::vector<double> theta);
    /// m = g, v = g^2: the fixed point of the moment recursions under a constant gradient.
    static MomentState steady(std::span<const double> g, std::vector<double> theta = {});

    std::size_t dim() const noexcept { return theta.size(); }
    /// Throws StructuralError if m, v and theta disagree in length.
    void check() const;
};

/// The direction R_k such that theta_{k+1} = theta_k - eta * R_k.
struct UpdateVector {
    std::vector<double> r;

    double norm2() const;
    double norm_inf() const;
};

struct StepResult {
    MomentState state;
    UpdateVector update;
};

/**
 * One Adam iteration from `state` with gradient `g`.
 *
 * m' = b1 m + (1-b1) g, v' = b2 v + (1-b2) g^2, R = m^ / (sqrt(v^) + eps)
 * where the hatted moments are divided by (1 - b^(k+1)) only when bias
 * correction is on. theta' = theta - eta R, followed by the decoupled
 * decay theta' *= (1 - eta wd) when weight_decay > 0.
 *
 * Throws StructuralError on a length mismatch and DomainError when
 * epsilon == 0 and a coordinate of v' is zero.
 */
StepResult adam_step(const MomentState& state, std::span<const double> g, const OptimizerConfig& config);

/// R_i = sign(g_i), with sign(0) = 0.
UpdateVector signsgd_step(std::span<const double> g);

/// R = g.
UpdateVector gd_step(std::span<const double> g);

/// Dispatches on config.method; the parameter step and decay are applied for every method.
StepResult optimizer_step(const MomentState& state, std::span<const double> g, const OptimizerConfig& config);

/// Update direction only, without touching theta. Used by the rescale probes.
UpdateVector update_direction(Method method, const MomentState& state, std::span<const double> g,
                              const OptimizerConfig& config);

/**
 * R_k of raw Adam (epsilon = 0) after k steps of the constant gradient c
 * from zero moments: sign(c) (1 - b1^k) / sqrt(1 - b2^k).
 */
double constant_gradient_closed_form(double c, std::uint64_t k, double beta1, double beta2);

}  // namespace scalelab
