#include "doctest.h"

#include "scalelab/error.hpp"
#include "scalelab/invariance.hpp"

#include <algorithm>
#include <cmath>

using namespace scalelab;

namespace {

MomentState frozen(std::vector<double> m, std::vector<double> v) {
    MomentState s;
    s.theta.assign(m.size(), 0.0);
    s.m = std::move(m);
    s.v = std::move(v);
    return s;
}

OptimizerConfig raw(double b1, double b2) {
    OptimizerConfig c;
    c.beta1 = b1;
    c.beta2 = b2;
    c.epsilon = 0.0;
    return c;
}

}  // namespace

TEST_CASE("signSGD is exactly invariant") {
    const std::vector<double> g{0.7, -3.0, 1e-4};
    std::vector<double> lambdas;
    for (double e = -3.0; e <= 3.0; e += 0.25) lambdas.push_back(std::pow(10.0, e));
    const auto r = exact_invariance_probe(Method::signsgd, MomentState::zeros(3), g, lambdas);
    CHECK(r.classification == Invariance::exact_invariant);
    for (double d : r.deviations) CHECK(d < 1e-15);
}

TEST_CASE("GD is scale linear") {
    const std::vector<double> g{1.0, -2.0};
    const std::vector<double> l{3.0};
    const auto r = exact_invariance_probe(Method::gd, MomentState::zeros(2), g, l);
    CHECK(r.classification == Invariance::scale_linear);
    CHECK(r.rescaled[0].r == std::vector<double>{3.0, -6.0});
    CHECK(r.deviations[0] == 4.0);
    const std::vector<double> many{1e-3, 0.5, 1.0, 2.0, 1e3};
    const auto m = exact_invariance_probe(Method::gd, MomentState::zeros(2), g, many);
    for (std::size_t i = 0; i < many.size(); ++i) CHECK(m.deviations[i] == std::abs(many[i] - 1.0) * 2.0);
}

TEST_CASE("Adam at a frozen state is neither") {
    const std::vector<double> g{1.0};
    const std::vector<double> l{2.0};
    const auto r = exact_invariance_probe(Method::adam, frozen({1.0}, {1.0}), g, l, raw(0.9, 0.9));
    CHECK(r.classification == Invariance::other);
    CHECK(r.base.r[0] == doctest::Approx(1.0));
    CHECK(r.rescaled[0].r[0] == doctest::Approx(0.9647638212377322).epsilon(1e-14));
    CHECK(r.deviations[0] == doctest::Approx(0.03523617876226781).epsilon(1e-12));
}

TEST_CASE("deviation at lambda one is zero") {
    const std::vector<double> g{0.3, -1.1};
    const std::vector<double> l{1.0};
    for (Method m : {Method::adam, Method::signsgd, Method::gd}) {
        const auto r = exact_invariance_probe(m, frozen({0.2, 0.1}, {0.5, 2.0}), g, l);
        CHECK(r.deviations[0] == 0.0);
    }
    const std::vector<double> bad{0.0};
    CHECK_THROWS_AS(exact_invariance_probe(Method::gd, MomentState::zeros(2), g, bad), DomainError);
}

TEST_CASE("first-order sensitivity") {
    const std::vector<double> grid{0.01, 0.02, 0.04, 0.08};
    const auto eq = first_order_sensitivity(TimeScales{1.0, 1.0}, grid);
    CHECK(eq.slope == doctest::Approx(2.0).epsilon(0.1));
    CHECK(std::abs(eq.coefficient) < 0.05);
    const auto up = first_order_sensitivity(TimeScales{1.0, 2.0}, grid);
    CHECK(up.slope == doctest::Approx(1.0).epsilon(0.1));
    CHECK(up.coefficient == doctest::Approx(1.0).epsilon(0.1));
    const auto down = first_order_sensitivity(TimeScales{2.0, 1.0}, grid);
    CHECK(std::abs(down.coefficient) == doctest::Approx(1.0).epsilon(0.1));
    CHECK(down.coefficient < 0.0);
    for (double d : down.deviations) CHECK(d < 0.0);
    const std::vector<double> two{0.01, 0.02};
    CHECK_THROWS_AS(first_order_sensitivity(TimeScales{}, two), DomainError);
}

TEST_CASE("step-scale experiments") {
    StepScaleExperiment exp;
    exp.scale_factors = {{500, 10.0}};
    OptimizerConfig sign;
    sign.method = Method::signsgd;
    auto tr = run_step_scale_experiment(exp, sign, 1000);
    for (double r : tr.norm_r) CHECK(r == 1.0);
    CHECK(tr.multiplier[499] == 1.0);
    CHECK(tr.multiplier[500] == 10.0);

    OptimizerConfig gd;
    gd.method = Method::gd;
    tr = run_step_scale_experiment(exp, gd, 1000);
    CHECK(tr.norm_r[500] == 10.0 * tr.norm_r[499]);

    OptimizerConfig diag = raw(0.95, 0.95);
    OptimizerConfig off = raw(0.9, 0.999);
    StepScaleExperiment long_exp;
    long_exp.scale_factors = {{20000, 10.0}};
    const auto a = summarize_transient(run_step_scale_experiment(long_exp, diag, 40000), 20000);
    const auto b = summarize_transient(run_step_scale_experiment(long_exp, off, 40000), 20000);
    CHECK(a.transient_integral < b.transient_integral);
    CHECK(a.peak_excursion < b.peak_excursion);
    CHECK(std::abs(a.final_norm - 1.0) < 1e-6);
    CHECK(std::abs(b.final_norm - 1.0) < 1e-6);
    CHECK(std::abs(a.reference - 1.0) < 1e-6);

    StepScaleExperiment bad;
    bad.scale_factors = {{10, -1.0}};
    CHECK_THROWS_AS(run_step_scale_experiment(bad, diag, 100), DomainError);
    bad.scale_factors = {{10, 2.0}, {10, 3.0}};
    CHECK_THROWS_AS(run_step_scale_experiment(bad, diag, 100), DomainError);
}

TEST_CASE("step-scale grid: the diagonal minimizes each row's transient") {
    StepScaleExperiment exp;
    exp.scale_factors = {{20000, 10.0}};
    const std::vector<double> axis{0.9, 0.99, 0.999};
    const auto rows = step_scale_grid(exp, raw(0.9, 0.9), axis, 40000, 20000, 2);
    REQUIRE(rows.size() == 9);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            if (i != j) CHECK(rows[i * 3 + i].transient_integral < rows[i * 3 + j].transient_integral);
        }
    }
    for (const auto& r : rows) CHECK(std::abs(r.final_norm - 1.0) < 1e-6);
}
