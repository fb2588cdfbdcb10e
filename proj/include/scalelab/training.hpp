#pragma once

#include "scalelab/metrics.hpp"
#include "scalelab/optimizer.hpp"
#include "scalelab/run_trace.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace scalelab {

enum class ProblemKind { quadratic, logistic, mlp };

std::string_view to_string(ProblemKind kind);
/// Throws std::invalid_argument for an unknown name.
ProblemKind parse_problem_kind(std::string_view name);

/**
 * A differentiable training objective with exact gradients.
 *
 * Implementations are immutable after construction, so one instance may be
 * shared by concurrent runs.
 */
class Problem {
public:
    virtual ~Problem() = default;

    virtual ProblemKind kind() const = 0;
    virtual std::size_t dim() const = 0;
    /// Number of training examples; 0 for objectives without data.
    virtual std::size_t num_samples() const = 0;
    /// Mean loss over the given examples (ignored for data-free objectives) and its gradient into `grad`.
    virtual double loss_and_grad(std::span<const double> theta, std::span<const std::size_t> batch,
                                 std::span<double> grad) const = 0;
    /// Seeded starting point.
    virtual std::vector<double> initial_theta(std::uint64_t seed) const = 0;

    std::string name() const { return std::string(to_string(kind())); }
    /// Full-data loss.
    double loss(std::span<const double> theta) const;
    /// Full-data gradient.
    std::vector<double> grad(std::span<const double> theta) const;
    std::vector<std::size_t> all_samples() const;
};

inline constexpr std::size_t kQuadraticDim = 50;
inline constexpr double kQuadraticCondition = 100.0;
inline constexpr std::size_t kBlobFeatures = 20;
inline constexpr std::size_t kBlobSamples = 512;
inline constexpr std::size_t kMlpHidden = 16;
inline constexpr std::size_t kMlpClasses = 2;

/**
 * quadratic: 0.5 theta^T D theta, D log-spaced on [1, 100], d = 50.
 * logistic: binary logistic regression (20 weights + bias) on two seeded Gaussian blobs of 512 points.
 * mlp: 20 -> 16 tanh -> 2 softmax cross-entropy on the same blobs.
 */
std::shared_ptr<const Problem> make_problem(ProblemKind kind, std::uint64_t data_seed = 0);

/// Diagonal of the quadratic objective.
std::vector<double> quadratic_diagonal();

/// Full batch for the quadratic, otherwise 32.
std::size_t default_batch_size(ProblemKind kind);

/**
 * Runs `steps` optimizer iterations from problem.initial_theta(seed).
 *
 * Minibatches of `batch_size` indices are drawn with replacement from
 * CounterRng(seed, stream 1); batch_size 0 or >= num_samples means full
 * batch. Records the batch loss at theta_k and ||R_k||_2. A non-finite loss
 * or gradient truncates the trace and sets `diverged`.
 */
RunTrace run_training(const Problem& problem, const OptimizerConfig& config, std::uint64_t seed, std::size_t steps,
                      std::size_t batch_size);

struct SweepOptions {
    std::vector<double> beta_axis{0.9, 0.99, 0.999};
    std::vector<std::uint64_t> seeds{0, 1, 2};
    std::size_t steps = 5000;
    std::size_t batch_size = 0;  ///< 0 selects default_batch_size
    std::size_t window = 200;
    OmegaMetric metric = OmegaMetric::omega1;
    /// eta, epsilon, bias correction and weight decay for every cell; betas are overwritten.
    OptimizerConfig base{0.9, 0.999, 1e-3, 1e-8, true, 0.0, Method::adam};
    std::size_t threads = 0;
    bool keep_traces = true;
};

struct SweepCell {
    double beta1 = 0.0;
    double beta2 = 0.0;
    std::uint64_t seed = 0;
    double omega1 = 0.0;
    double omega2 = 0.0;
    std::size_t window = 0;
    RunTrace trace;  ///< empty unless keep_traces
};

struct SweepResult {
    std::string problem;
    SweepOptions options;
    std::vector<SweepCell> cells;  ///< seed-major, then beta1, then beta2
    OscillationGridReport report;
};

/// Omega of an update-norm series after EMA smoothing; NaN for diverged or too-short traces.
double trace_oscillation(const RunTrace& trace, std::size_t window, OmegaMetric metric);

/// Every (beta1, beta2, seed) cell, EMA-smoothed oscillation per cell, then grid_report on the chosen metric.
SweepResult sweep_grid(const Problem& problem, const SweepOptions& options);

/// Rebuilds the per-seed omega grids of a sweep for the given metric.
std::vector<OmegaGrid> sweep_grids(const SweepResult& result, OmegaMetric metric);

}  // namespace scalelab
