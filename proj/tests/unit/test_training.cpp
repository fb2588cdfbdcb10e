#include "doctest.h"

#include "scalelab/error.hpp"
#include "scalelab/rng.hpp"
#include "scalelab/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

using namespace scalelab;

TEST_CASE("problem factory") {
    CHECK(make_problem(ProblemKind::quadratic)->dim() == 50);
    CHECK(make_problem(ProblemKind::logistic)->dim() == 21);
    CHECK(make_problem(ProblemKind::mlp)->dim() == 20 * 16 + 16 + 16 * 2 + 2);
    CHECK(make_problem(ProblemKind::logistic)->num_samples() == 512);
    CHECK(parse_problem_kind("mlp") == ProblemKind::mlp);
    CHECK_THROWS_AS(parse_problem_kind("resnet"), std::invalid_argument);
    CHECK(default_batch_size(ProblemKind::quadratic) == 0);
    CHECK(default_batch_size(ProblemKind::logistic) == 32);
}

TEST_CASE("quadratic loss and gradient") {
    const auto p = make_problem(ProblemKind::quadratic);
    const std::vector<double> zero(50, 0.0);
    CHECK(p->loss(zero) == 0.0);
    for (double g : p->grad(zero)) CHECK(g == 0.0);
    const auto d = quadratic_diagonal();
    CHECK(d.front() == doctest::Approx(1.0));
    CHECK(d.back() == doctest::Approx(100.0));
    std::vector<double> theta(50);
    for (std::size_t i = 0; i < 50; ++i) theta[i] = 0.1 * static_cast<double>(i) - 2.0;
    const auto g = p->grad(theta);
    for (std::size_t i = 0; i < 50; ++i) CHECK(g[i] == doctest::Approx(d[i] * theta[i]));
}

TEST_CASE("property: gradients match central finite differences") {
    for (ProblemKind kind : {ProblemKind::quadratic, ProblemKind::logistic, ProblemKind::mlp}) {
        for (std::uint64_t seed : {0u, 1u, 2u}) {
            const auto p = make_problem(kind, seed);
            CounterRng rng(seed, 7);
            for (int probe = 0; probe < 5; ++probe) {
                std::vector<double> theta(p->dim());
                for (double& x : theta) x = 0.5 * rng.normal();
                const auto g = p->grad(theta);
                std::vector<double> fd(p->dim());
                for (std::size_t i = 0; i < p->dim(); ++i) {
                    const double h = 1e-5 * std::max(1.0, std::abs(theta[i]));
                    auto tp = theta, tm = theta;
                    tp[i] += h;
                    tm[i] -= h;
                    fd[i] = (p->loss(tp) - p->loss(tm)) / (2.0 * h);
                }
                double num = 0.0, den = 0.0;
                for (std::size_t i = 0; i < p->dim(); ++i) {
                    num += (g[i] - fd[i]) * (g[i] - fd[i]);
                    den += g[i] * g[i];
                }
                CHECK(std::sqrt(num / den) < 1e-5);
            }
        }
    }
}

TEST_CASE("gradient descent on the quadratic decreases the loss") {
    const auto p = make_problem(ProblemKind::quadratic);
    OptimizerConfig cfg;
    cfg.method = Method::gd;
    cfg.eta = 0.005;
    const auto tr = run_training(*p, cfg, 0, 200, 0);
    REQUIRE(tr.size() == 200);
    for (std::size_t k = 1; k < tr.size(); ++k) CHECK(tr.loss[k] < tr.loss[k - 1]);
    cfg.method = Method::signsgd;
    const auto ts = run_training(*p, cfg, 0, 50, 0);
    for (double r : ts.norm_r) CHECK(r == doctest::Approx(std::sqrt(50.0)));
}

TEST_CASE("runs are bit-identical given seed and config") {
    const auto p = make_problem(ProblemKind::mlp);
    OptimizerConfig cfg;
    cfg.bias_correction = true;
    const auto a = run_training(*p, cfg, 3, 300, 32);
    const auto b = run_training(*p, cfg, 3, 300, 32);
    CHECK(a.loss == b.loss);
    CHECK(a.norm_r == b.norm_r);
    const auto c = run_training(*p, cfg, 4, 300, 32);
    CHECK(a.loss != c.loss);
    CHECK(a.size() == 300);
    for (double r : a.norm_r) CHECK(r >= 0.0);
}

TEST_CASE("divergence truncates the trace") {
    const auto p = make_problem(ProblemKind::quadratic);
    OptimizerConfig cfg;
    cfg.method = Method::gd;
    cfg.eta = 1.0;  // far above 2 / lambda_max
    const auto tr = run_training(*p, cfg, 0, 5000, 0);
    CHECK(tr.diverged);
    CHECK(tr.size() < 5000);
    CHECK(std::isnan(trace_oscillation(tr, 10, OmegaMetric::omega1)));
    CHECK_THROWS(run_training(*p, cfg, 0, 0, 0));
}

TEST_CASE("sweep layout and determinism") {
    const auto p = make_problem(ProblemKind::logistic);
    SweepOptions opt;
    opt.seeds = {0, 1};
    opt.steps = 300;
    opt.window = 10;
    opt.threads = 2;
    const auto a = sweep_grid(*p, opt);
    REQUIRE(a.cells.size() == 18);
    CHECK(a.cells[0].beta1 == 0.9);
    CHECK(a.cells[1].beta2 == 0.99);
    CHECK(a.cells[9].seed == 1);
    CHECK(a.report.n + 3 * a.report.degenerate_rows == 6);
    opt.threads = 1;
    const auto b = sweep_grid(*p, opt);
    for (std::size_t i = 0; i < a.cells.size(); ++i) CHECK(a.cells[i].omega1 == b.cells[i].omega1);
    CHECK(a.report.k == b.report.k);
    const auto g2 = sweep_grids(a, OmegaMetric::omega2);
    CHECK(g2.size() == 2);
    CHECK(g2[1](2, 1) == a.cells[9 + 7].omega2);
}

TEST_CASE("window one reproduces the raw-series oscillation") {
    const auto p = make_problem(ProblemKind::logistic);
    OptimizerConfig cfg;
    const auto tr = run_training(*p, cfg, 0, 200, 32);
    CHECK(trace_oscillation(tr, 1, OmegaMetric::omega1) == oscillation_omega1(tr.norm_r));
}

TEST_CASE("update bound from the recorded state") {
    // ||R_k||_inf <= max_i |m_i| / sqrt(v_i) for raw Adam with epsilon = 0.
    const auto p = make_problem(ProblemKind::logistic);
    OptimizerConfig cfg;
    cfg.epsilon = 0.0;
    MomentState s = MomentState::at(p->initial_theta(1));
    for (int k = 0; k < 100; ++k) {
        const auto g = p->grad(s.theta);
        auto res = adam_step(s, g, cfg);
        double bound = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i)
            bound = std::max(bound, std::abs(res.state.m[i]) / std::sqrt(res.state.v[i]));
        CHECK(res.update.norm_inf() <= bound);
        s = std::move(res.state);
    }
}
