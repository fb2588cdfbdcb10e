#include "doctest.h"

#include "scalelab/drift.hpp"
#include "scalelab/error.hpp"
#include "scalelab/flow.hpp"

#include <cmath>
#include <numbers>
#include <vector>

using namespace scalelab;

TEST_CASE("log drift") {
    const auto e = GradientSignal::uniform(ScalarSignal::exponential(1.0, 0.3));
    for (double t : {0.0, 2.0, 9.0}) CHECK(log_drift(e, t)[0] == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(log_drift(GradientSignal::uniform(ScalarSignal::constant(4.0)), 1.0)[0] == 0.0);
    const auto s = GradientSignal::uniform(ScalarSignal::offset_sine(2.0, 1.0, 1.0));
    CHECK(log_drift(s, 0.0)[0] == doctest::Approx(0.5));
    CHECK(log_drift_fd(s, 0.0)[0] == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(log_drift_derivative(e, 1.0)[0] == doctest::Approx(0.0).epsilon(1e-14));
    const auto z = GradientSignal::uniform(ScalarSignal::offset_sine(0.0, 1.0, 1.0));
    CHECK_THROWS_AS(log_drift(z, 0.0), DomainError);
}

TEST_CASE("property: finite-difference drift matches the analytic drift") {
    const ScalarSignal sigs[] = {ScalarSignal::exponential(2.0, -0.2), ScalarSignal::sinusoidal_log(1.0, 0.4, 0.7),
                                 ScalarSignal::offset_sine(3.0, 1.0, 1.3), ScalarSignal::polynomial({1.0, 0.5, 0.1})};
    for (const auto& s : sigs) {
        const auto g = GradientSignal::uniform(s);
        for (double t : {0.1, 1.0, 4.5, 20.0}) {
            const double d = log_drift(g, t)[0];
            CHECK(std::abs(log_drift_fd(g, t)[0] - d) <= 1e-6 * std::max(1.0, std::abs(d)));
        }
    }
}

TEST_CASE("drift bounds") {
    auto p = drift_bounds(GradientSignal::uniform(ScalarSignal::exponential(1.0, 0.05)), 0.0, 10.0);
    CHECK(p.lambda_bound == doctest::Approx(0.05 * 1.01).epsilon(1e-14));
    CHECK(p.lambda_prime_bound == doctest::Approx(0.0).epsilon(1e-12));
    p = drift_bounds(GradientSignal::uniform(ScalarSignal::constant(2.0)), 0.0, 10.0);
    CHECK(p.lambda_bound == 0.0);
    CHECK(p.lambda_prime_bound == 0.0);
    p = drift_bounds(GradientSignal::uniform(ScalarSignal::offset_sine(2.0, 1.0, 1.0)), 0.0, 2.0 * std::numbers::pi);
    CHECK(p.lambda_bound == doctest::Approx(1.01 / std::sqrt(3.0)).epsilon(1e-6));
    CHECK(p.lambda_bound >= 1.0 / std::sqrt(3.0));
}

TEST_CASE("first-order predictions") {
    TimeScales ts{1.0, 2.0};
    auto pr = predict_first_order(GradientSignal::uniform(ScalarSignal::constant(-3.0)), ts, 5.0);
    CHECK(pr.m[0] == -3.0);
    CHECK(pr.v[0] == 9.0);
    CHECK(pr.r[0] == -1.0);
    pr = predict_first_order(GradientSignal::uniform(ScalarSignal::exponential(1.0, 0.1)), ts, 0.0);
    CHECK(pr.r[0] == doctest::Approx(1.1));
    TimeScales eq{1.5, 1.5};
    for (double d : {0.01, 0.2, -0.3}) {
        pr = predict_first_order(GradientSignal::uniform(ScalarSignal::exponential(2.0, d)), eq, 1.0);
        CHECK(pr.r[0] == 1.0);
    }
}

TEST_CASE("property: prediction agrees with the exact gains to first order") {
    for (TimeScales ts : {TimeScales{1.0, 1.0}, TimeScales{1.0, 2.0}, TimeScales{2.0, 1.0}}) {
        for (double d : {0.0125, 0.025, 0.05, 0.1}) {
            const auto g = GradientSignal::uniform(ScalarSignal::exponential(1.0, d));
            const double pred = predict_first_order(g, ts, 0.0).r[0];
            const double gap = std::abs(steady_state_exponential_gains(d, ts).r - pred);
            const double half = std::abs(steady_state_exponential_gains(d / 2.0, ts).r -
                                         predict_first_order(GradientSignal::uniform(ScalarSignal::exponential(1.0, d / 2.0)), ts, 0.0).r[0]);
            CHECK(gap <= 2.0 * half * 4.0);
        }
    }
}

namespace {

RemainderReport remainder_for(double d0, TimeScales ts) {
    const auto g = GradientSignal::uniform(ScalarSignal::exponential(1.0, d0));
    const auto tr = integrate_flow(g, ts, steady_state_init(g, ts, 0.0), 2.0 * ts.burn_in(), ts.default_step());
    auto rep = measure_remainder(tr, g, ts);
    rep.delta0 = d0;
    return rep;
}

}  // namespace

TEST_CASE("measured remainders") {
    TimeScales ts;
    const auto c = GradientSignal::uniform(ScalarSignal::constant(2.5));
    const auto tr = integrate_flow(c, ts, FlowState::uniform(1, 0.0, 1.0), 30.0, 0.02);
    auto rep = measure_remainder(tr, c, ts);
    CHECK(rep.m.max_abs_remainder < 1e-3);
    const auto tr2 = integrate_flow(c, ts, FlowState::uniform(1, 2.5, 6.25), 30.0, 0.02);
    rep = measure_remainder(tr2, c, ts);
    CHECK(rep.m.max_abs_remainder < 1e-8);
    CHECK(rep.v.max_abs_remainder < 1e-8);
    CHECK(rep.r.max_abs_remainder < 1e-8);
    CHECK(std::isnan(rep.r.bound));

    const auto a = remainder_for(0.05, ts);
    const auto b = remainder_for(0.025, ts);
    CHECK(a.r.max_abs_remainder == doctest::Approx(0.0011344303).epsilon(1e-5));
    CHECK(b.r.max_abs_remainder == doctest::Approx(0.00029748625).epsilon(1e-5));
    CHECK(a.r.max_abs_remainder / b.r.max_abs_remainder == doctest::Approx(3.813).epsilon(1e-3));
    for (const auto& r : {a, b}) {
        CHECK(r.m.max_abs_remainder <= r.m.bound);
        CHECK(r.v.max_abs_remainder <= r.v.bound);
        CHECK(r.m.max_abs_remainder >= 0.0);
        CHECK(r.samples_used > 0);
    }

    const auto early = integrate_flow(c, ts, FlowState::uniform(1, 2.5, 6.25), 5.0, 0.02);
    CHECK_THROWS_AS(measure_remainder(early, c, ts), DomainError);
}

TEST_CASE("fitted remainder order is two on every channel") {
    TimeScales ts{1.0, 2.0};
    std::vector<RemainderReport> reps;
    for (double d : {0.01, 0.02, 0.04}) reps.push_back(remainder_for(d, ts));
    fit_remainder_order(reps);
    CHECK(reps[0].r.fitted_order == doctest::Approx(2.0).epsilon(0.1));
    CHECK(reps[2].r.fitted_order == reps[0].r.fitted_order);
}

TEST_CASE("log-log slope") {
    const std::vector<double> x{1.0, 2.0, 4.0, 8.0};
    const std::vector<double> y{3.0, 12.0, 48.0, 192.0};
    CHECK(loglog_slope(x, y) == doctest::Approx(2.0));
    const std::vector<double> one{1.0};
    CHECK_THROWS_AS(loglog_slope(one, one), DomainError);
}

TEST_CASE("tracking lemma examples") {
    auto r = tracking_check(ScalarSignal::polynomial({0.0, 1.0}), 1.0, -1.0, 0.0, 20.0);
    CHECK(r.max_residual < 1e-12);
    CHECK(r.pass);
    r = tracking_check(ScalarSignal::constant(3.0), 1.0, 3.0, 0.0, 20.0);
    CHECK(r.max_residual == 0.0);
    CHECK(r.pass);
    r = tracking_check(ScalarSignal::offset_sine(0.0, 1.0, 1.0), 0.5, 0.0, 0.0, 10.0);
    CHECK(r.pass);
    CHECK(r.steady_bound == doctest::Approx(0.25 * 1.01).epsilon(1e-6));
    CHECK(r.min_margin >= 0.0);
}

TEST_CASE("property: tracking bound holds on a signal battery") {
    const ScalarSignal sigs[] = {ScalarSignal::polynomial({1.0, -0.3, 0.05}), ScalarSignal::offset_sine(1.0, 2.0, 1.7),
                                 ScalarSignal::exponential(0.5, 0.08), ScalarSignal::sinusoidal_log(1.0, 0.6, 0.9)};
    for (const auto& s : sigs) {
        for (double tau : {0.3, 1.0, 2.5}) {
            for (double x0 : {-2.0, 0.0, 4.0}) {
                const auto r = tracking_check(s, tau, x0, 0.0, 20.0 * tau);
                CHECK(r.pass);
                CHECK(r.min_margin >= 0.0);
            }
        }
    }
}
