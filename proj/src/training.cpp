#include "scalelab/training.hpp"

#include "scalelab/error.hpp"
#include "scalelab/parallel.hpp"
#include "scalelab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace scalelab {

namespace {

constexpr std::uint64_t kDataStream = 0;
constexpr std::uint64_t kBatchStream = 1;
constexpr std::uint64_t kInitStream = 2;
constexpr double kBlobSeparation = 1.0;

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }
double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

struct Blobs {
    std::vector<double> x;  // row-major, num_samples x kBlobFeatures
    std::vector<int> y;

    const double* row(std::size_t i) const { return x.data() + i * kBlobFeatures; }
};

Blobs make_blobs(std::uint64_t seed) {
    CounterRng rng(seed, kDataStream);
    std::vector<double> dir(kBlobFeatures);
    double norm = 0.0;
    for (double& d : dir) {
        d = rng.normal();
        norm += d * d;
    }
    norm = std::sqrt(norm);
    for (double& d : dir) d /= norm;

    Blobs b{std::vector<double>(kBlobSamples * kBlobFeatures), std::vector<int>(kBlobSamples)};
    for (std::size_t i = 0; i < kBlobSamples; ++i) {
        const int label = static_cast<int>(i % 2);
        b.y[i] = label;
        const double sign = label == 1 ? 1.0 : -1.0;
        for (std::size_t j = 0; j < kBlobFeatures; ++j)
            b.x[i * kBlobFeatures + j] = sign * kBlobSeparation * dir[j] + rng.normal();
    }
    return b;
}

void check_sizes(const Problem& p, std::span<const double> theta, std::span<double> grad) {
    if (theta.size() != p.dim() || grad.size() != p.dim())
        throw StructuralError(p.name() + ": parameter or gradient length does not match dim " +
                              std::to_string(p.dim()));
}

void check_batch(const Problem& p, std::span<const std::size_t> batch) {
    if (batch.empty()) throw StructuralError(p.name() + ": empty batch");
    for (std::size_t i : batch) {
        if (i >= p.num_samples()) throw StructuralError(p.name() + ": batch index out of range");
    }
}

class QuadraticProblem final : public Problem {
public:
    QuadraticProblem() : diag_(quadratic_diagonal()) {}

    ProblemKind kind() const override { return ProblemKind::quadratic; }
    std::size_t dim() const override { return diag_.size(); }
    std::size_t num_samples() const override { return 0; }

    double loss_and_grad(std::span<const double> theta, std::span<const std::size_t>,
                         std::span<double> grad) const override {
        check_sizes(*this, theta, grad);
        double f = 0.0;
        for (std::size_t i = 0; i < diag_.size(); ++i) {
            grad[i] = diag_[i] * theta[i];
            f += 0.5 * diag_[i] * theta[i] * theta[i];
        }
        return f;
    }

    std::vector<double> initial_theta(std::uint64_t seed) const override {
        CounterRng rng(seed, kInitStream);
        std::vector<double> theta(dim());
        for (double& t : theta) t = rng.normal();
        return theta;
    }

private:
    std::vector<double> diag_;
};

class LogisticProblem final : public Problem {
public:
    explicit LogisticProblem(std::uint64_t seed) : data_(make_blobs(seed)) {}

    ProblemKind kind() const override { return ProblemKind::logistic; }
    std::size_t dim() const override { return kBlobFeatures + 1; }
    std::size_t num_samples() const override { return kBlobSamples; }

    double loss_and_grad(std::span<const double> theta, std::span<const std::size_t> batch,
                         std::span<double> grad) const override {
        check_sizes(*this, theta, grad);
        check_batch(*this, batch);
        std::fill(grad.begin(), grad.end(), 0.0);
        const double bias = theta[kBlobFeatures];
        double f = 0.0;
        for (std::size_t i : batch) {
            const double* x = data_.row(i);
            double z = bias;
            for (std::size_t j = 0; j < kBlobFeatures; ++j) z += theta[j] * x[j];
            const double y = data_.y[i];
            f += softplus(z) - y * z;
            const double err = sigmoid(z) - y;
            for (std::size_t j = 0; j < kBlobFeatures; ++j) grad[j] += err * x[j];
            grad[kBlobFeatures] += err;
        }
        const double inv = 1.0 / static_cast<double>(batch.size());
        for (double& g : grad) g *= inv;
        return f * inv;
    }

    std::vector<double> initial_theta(std::uint64_t seed) const override {
        CounterRng rng(seed, kInitStream);
        std::vector<double> theta(dim(), 0.0);
        const double scale = 1.0 / std::sqrt(static_cast<double>(kBlobFeatures));
        for (std::size_t j = 0; j < kBlobFeatures; ++j) theta[j] = scale * rng.normal();
        return theta;
    }

private:
    Blobs data_;
};

// Parameter layout: W1 (hidden x features), b1 (hidden), W2 (classes x hidden), b2 (classes).
class MlpProblem final : public Problem {
public:
    static constexpr std::size_t kW1 = 0;
    static constexpr std::size_t kB1 = kW1 + kMlpHidden * kBlobFeatures;
    static constexpr std::size_t kW2 = kB1 + kMlpHidden;
    static constexpr std::size_t kB2 = kW2 + kMlpClasses * kMlpHidden;
    static constexpr std::size_t kDim = kB2 + kMlpClasses;

    explicit MlpProblem(std::uint64_t seed) : data_(make_blobs(seed)) {}

    ProblemKind kind() const override { return ProblemKind::mlp; }
    std::size_t dim() const override { return kDim; }
    std::size_t num_samples() const override { return kBlobSamples; }

    double loss_and_grad(std::span<const double> theta, std::span<const std::size_t> batch,
                         std::span<double> grad) const override {
        check_sizes(*this, theta, grad);
        check_batch(*this, batch);
        std::fill(grad.begin(), grad.end(), 0.0);
        double hidden[kMlpHidden];
        double dpre[kMlpHidden];
        double logits[kMlpClasses];
        double f = 0.0;
        for (std::size_t i : batch) {
            const double* x = data_.row(i);
            for (std::size_t h = 0; h < kMlpHidden; ++h) {
                double z = theta[kB1 + h];
                const double* w = theta.data() + kW1 + h * kBlobFeatures;
                for (std::size_t j = 0; j < kBlobFeatures; ++j) z += w[j] * x[j];
                hidden[h] = std::tanh(z);
            }
            double top = -std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < kMlpClasses; ++c) {
                double z = theta[kB2 + c];
                const double* w = theta.data() + kW2 + c * kMlpHidden;
                for (std::size_t h = 0; h < kMlpHidden; ++h) z += w[h] * hidden[h];
                logits[c] = z;
                top = std::max(top, z);
            }
            double denom = 0.0;
            for (double z : logits) denom += std::exp(z - top);
            const auto label = static_cast<std::size_t>(data_.y[i]);
            f += top + std::log(denom) - logits[label];

            std::fill(std::begin(dpre), std::end(dpre), 0.0);
            for (std::size_t c = 0; c < kMlpClasses; ++c) {
                const double dout = std::exp(logits[c] - top) / denom - (c == label ? 1.0 : 0.0);
                grad[kB2 + c] += dout;
                for (std::size_t h = 0; h < kMlpHidden; ++h) {
                    grad[kW2 + c * kMlpHidden + h] += dout * hidden[h];
                    dpre[h] += dout * theta[kW2 + c * kMlpHidden + h];
                }
            }
            for (std::size_t h = 0; h < kMlpHidden; ++h) {
                const double d = dpre[h] * (1.0 - hidden[h] * hidden[h]);
                grad[kB1 + h] += d;
                double* gw = grad.data() + kW1 + h * kBlobFeatures;
                for (std::size_t j = 0; j < kBlobFeatures; ++j) gw[j] += d * x[j];
            }
        }
        const double inv = 1.0 / static_cast<double>(batch.size());
        for (double& g : grad) g *= inv;
        return f * inv;
    }

    std::vector<double> initial_theta(std::uint64_t seed) const override {
        CounterRng rng(seed, kInitStream);
        std::vector<double> theta(kDim, 0.0);
        const double s1 = 1.0 / std::sqrt(static_cast<double>(kBlobFeatures));
        const double s2 = 1.0 / std::sqrt(static_cast<double>(kMlpHidden));
        for (std::size_t j = kW1; j < kB1; ++j) theta[j] = s1 * rng.normal();
        for (std::size_t j = kW2; j < kB2; ++j) theta[j] = s2 * rng.normal();
        return theta;
    }

private:
    Blobs data_;
};

bool all_finite(std::span<const double> xs) {
    return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

std::string_view to_string(ProblemKind kind) {
    switch (kind) {
        case ProblemKind::quadratic: return "quadratic";
        case ProblemKind::logistic: return "logistic";
        case ProblemKind::mlp: return "mlp";
    }
    return "unknown";
}

ProblemKind parse_problem_kind(std::string_view name) {
    if (name == "quadratic") return ProblemKind::quadratic;
    if (name == "logistic") return ProblemKind::logistic;
    if (name == "mlp") return ProblemKind::mlp;
    throw std::invalid_argument("unknown problem kind '" + std::string(name) + "'");
}

double Problem::loss(std::span<const double> theta) const {
    std::vector<double> scratch(dim());
    const auto batch = all_samples();
    return loss_and_grad(theta, batch, scratch);
}

std::vector<double> Problem::grad(std::span<const double> theta) const {
    std::vector<double> g(dim());
    const auto batch = all_samples();
    loss_and_grad(theta, batch, g);
    return g;
}

std::vector<std::size_t> Problem::all_samples() const {
    std::vector<std::size_t> idx(num_samples());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return idx;
}

std::vector<double> quadratic_diagonal() {
    std::vector<double> d(kQuadraticDim);
    for (std::size_t i = 0; i < kQuadraticDim; ++i)
        d[i] = std::pow(kQuadraticCondition, static_cast<double>(i) / static_cast<double>(kQuadraticDim - 1));
    return d;
}

std::shared_ptr<const Problem> make_problem(ProblemKind kind, std::uint64_t data_seed) {
    switch (kind) {
        case ProblemKind::quadratic: return std::make_shared<QuadraticProblem>();
        case ProblemKind::logistic: return std::make_shared<LogisticProblem>(data_seed);
        case ProblemKind::mlp: return std::make_shared<MlpProblem>(data_seed);
    }
    throw std::invalid_argument("unknown problem kind");
}

std::size_t default_batch_size(ProblemKind kind) { return kind == ProblemKind::quadratic ? 0 : 32; }

RunTrace run_training(const Problem& problem, const OptimizerConfig& config, std::uint64_t seed, std::size_t steps,
                      std::size_t batch_size) {
    if (steps < 1) throw DomainError("run_training: steps must be at least 1");
    config.validate();
    RunTrace trace;
    trace.config = config;
    trace.seed = seed;
    trace.problem = problem.name();
    trace.step.reserve(steps);
    trace.loss.reserve(steps);
    trace.norm_r.reserve(steps);

    const std::size_t n = problem.num_samples();
    const bool full_batch = n == 0 || batch_size == 0 || batch_size >= n;
    std::vector<std::size_t> batch = full_batch ? problem.all_samples() : std::vector<std::size_t>(batch_size);
    CounterRng batch_rng(seed, kBatchStream);

    MomentState state = MomentState::at(problem.initial_theta(seed));
    std::vector<double> grad(problem.dim());
    for (std::size_t k = 0; k < steps; ++k) {
        if (!full_batch) {
            for (auto& idx : batch) idx = static_cast<std::size_t>(batch_rng.below(n));
        }
        const double f = problem.loss_and_grad(state.theta, batch, grad);
        if (!std::isfinite(f) || !all_finite(grad)) {
            trace.diverged = true;
            break;
        }
        StepResult next = optimizer_step(state, grad, config);
        const double norm = next.update.norm2();
        if (!std::isfinite(norm)) {
            trace.diverged = true;
            break;
        }
        trace.step.push_back(k);
        trace.loss.push_back(f);
        trace.norm_r.push_back(norm);
        state = std::move(next.state);
    }
    return trace;
}

double trace_oscillation(const RunTrace& trace, std::size_t window, OmegaMetric metric) {
    const std::size_t need = metric == OmegaMetric::omega1 ? 2 : 3;
    if (trace.diverged || trace.norm_r.size() < need) return std::numeric_limits<double>::quiet_NaN();
    return oscillation(metric, ema_smooth(trace.norm_r, window).values);
}

SweepResult sweep_grid(const Problem& problem, const SweepOptions& options) {
    if (options.beta_axis.empty() || options.seeds.empty()) throw DomainError("sweep_grid: empty axis or seed list");
    for (double b : options.beta_axis) {
        if (!(b > 0.0 && b < 1.0)) throw DomainError("sweep_grid: betas must lie in (0, 1)");
    }
    ema_alpha(options.window);

    SweepResult result;
    result.problem = problem.name();
    result.options = options;
    const std::size_t nb = options.beta_axis.size();
    const std::size_t batch =
        options.batch_size ? options.batch_size : default_batch_size(problem.kind());
    result.cells.resize(options.seeds.size() * nb * nb);

    parallel_for(
        result.cells.size(),
        [&](std::size_t idx) {
            const std::size_t s = idx / (nb * nb);
            const std::size_t row = (idx / nb) % nb;
            const std::size_t col = idx % nb;
            OptimizerConfig cfg = options.base;
            cfg.beta1 = options.beta_axis[row];
            cfg.beta2 = options.beta_axis[col];
            SweepCell& cell = result.cells[idx];
            cell.beta1 = cfg.beta1;
            cell.beta2 = cfg.beta2;
            cell.seed = options.seeds[s];
            cell.window = options.window;
            RunTrace trace = run_training(problem, cfg, cell.seed, options.steps, batch);
            cell.omega1 = trace_oscillation(trace, options.window, OmegaMetric::omega1);
            cell.omega2 = trace_oscillation(trace, options.window, OmegaMetric::omega2);
            if (options.keep_traces) cell.trace = std::move(trace);
        },
        options.threads);

    result.report = grid_report(sweep_grids(result, options.metric), options.beta_axis);
    return result;
}

std::vector<OmegaGrid> sweep_grids(const SweepResult& result, OmegaMetric metric) {
    const std::size_t nb = result.options.beta_axis.size();
    std::vector<OmegaGrid> grids(result.options.seeds.size(), OmegaGrid(nb));
    for (std::size_t idx = 0; idx < result.cells.size(); ++idx) {
        const auto& cell = result.cells[idx];
        grids[idx / (nb * nb)].values[idx % (nb * nb)] = metric == OmegaMetric::omega1 ? cell.omega1 : cell.omega2;
    }
    return grids;
}

}  // namespace scalelab
