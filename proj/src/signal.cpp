#include "scalelab/signal.hpp"

#include "scalelab/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace scalelab {

double fd_step(double t) { return 1e-4 * std::max(1.0, std::abs(t)); }

namespace {

double second_fd_step(double t) { return 1e-3 * std::max(1.0, std::abs(t)); }

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double catmull_rom(const ScalarSignal::Tabulated& tab, double t) {
    const auto& y = tab.values;
    const auto n = static_cast<long>(y.size());
    if (n == 1) return y[0];
    const double x = std::clamp((t - tab.t0) / tab.dt, 0.0, static_cast<double>(n - 1));
    const long i = std::min(static_cast<long>(std::floor(x)), n - 2);
    const double u = x - static_cast<double>(i);
    auto at = [&](long j) { return y[static_cast<std::size_t>(std::clamp(j, 0L, n - 1))]; };
    const double p0 = at(i - 1), p1 = at(i), p2 = at(i + 1), p3 = at(i + 2);
    return 0.5 * (2.0 * p1 + (-p0 + p2) * u + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * u * u +
                  (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * u * u * u);
}

}  // namespace

ScalarSignal ScalarSignal::constant(double c) { return ScalarSignal(Constant{c}); }

ScalarSignal ScalarSignal::exponential(double c, double rate) { return ScalarSignal(Exponential{c, rate}); }

ScalarSignal ScalarSignal::sinusoidal_log(double c, double amp, double freq, double phase) {
    return ScalarSignal(SinusoidalLog{c, amp, freq, phase});
}

ScalarSignal ScalarSignal::offset_sine(double offset, double amp, double freq, double phase) {
    return ScalarSignal(OffsetSine{offset, amp, freq, phase});
}

ScalarSignal ScalarSignal::polynomial(std::vector<double> coeffs) {
    if (coeffs.empty()) coeffs.push_back(0.0);
    return ScalarSignal(Polynomial{std::move(coeffs)});
}

ScalarSignal ScalarSignal::step_scale(double c, std::vector<std::pair<double, double>> breakpoints) {
    std::sort(breakpoints.begin(), breakpoints.end());
    return ScalarSignal(StepScale{c, std::move(breakpoints)});
}

ScalarSignal ScalarSignal::tabulated(double t0, double dt, std::vector<double> values) {
    if (values.empty()) throw StructuralError("tabulated signal needs at least one sample");
    if (!(dt > 0.0)) throw DomainError("tabulated signal needs dt > 0");
    return ScalarSignal(Tabulated{t0, dt, std::move(values)});
}

ScalarSignal ScalarSignal::custom(std::function<double(double)> f, std::function<double(double)> df,
                                  std::function<double(double)> d2f) {
    if (!f) throw StructuralError("custom signal needs a value function");
    return ScalarSignal(std::make_shared<const Custom>(Custom{std::move(f), std::move(df), std::move(d2f)}));
}

double ScalarSignal::value(double t) const {
    return std::visit(
        overloaded{
            [](const Constant& s) { return s.c; },
            [t](const Exponential& s) { return s.c * std::exp(s.rate * t); },
            [t](const SinusoidalLog& s) { return s.c * std::exp(s.amp * std::sin(s.freq * t + s.phase)); },
            [t](const OffsetSine& s) { return s.offset + s.amp * std::sin(s.freq * t + s.phase); },
            [t](const Polynomial& s) {
                double acc = 0.0;
                for (auto it = s.coeffs.rbegin(); it != s.coeffs.rend(); ++it) acc = acc * t + *it;
                return acc;
            },
            [t](const StepScale& s) {
                double mult = 1.0;
                for (const auto& [time, m] : s.breakpoints) {
                    if (time <= t) mult = m;
                }
                return s.c * mult;
            },
            [t](const Tabulated& s) { return catmull_rom(s, t); },
            [t](const std::shared_ptr<const Custom>& s) { return s->f(t); },
        },
        spec_);
}

double ScalarSignal::fd_derivative(double t) const {
    const double h = fd_step(t);
    return (value(t + h) - value(t - h)) / (2.0 * h);
}

double ScalarSignal::fd_second_derivative(double t) const {
    const double h = second_fd_step(t);
    return (value(t + h) - 2.0 * value(t) + value(t - h)) / (h * h);
}

double ScalarSignal::derivative(double t) const {
    return std::visit(
        overloaded{
            [](const Constant&) { return 0.0; },
            [t](const Exponential& s) { return s.c * s.rate * std::exp(s.rate * t); },
            [t](const SinusoidalLog& s) {
                const double arg = s.freq * t + s.phase;
                return s.c * std::exp(s.amp * std::sin(arg)) * s.amp * s.freq * std::cos(arg);
            },
            [t](const OffsetSine& s) { return s.amp * s.freq * std::cos(s.freq * t + s.phase); },
            [t](const Polynomial& s) {
                double acc = 0.0;
                for (std::size_t j = s.coeffs.size(); j-- > 1;) acc = acc * t + static_cast<double>(j) * s.coeffs[j];
                return acc;
            },
            [](const StepScale&) { return 0.0; },
            [this, t](const Tabulated&) { return fd_derivative(t); },
            [this, t](const std::shared_ptr<const Custom>& s) { return s->df ? s->df(t) : fd_derivative(t); },
        },
        spec_);
}

double ScalarSignal::second_derivative(double t) const {
    return std::visit(
        overloaded{
            [](const Constant&) { return 0.0; },
            [t](const Exponential& s) { return s.c * s.rate * s.rate * std::exp(s.rate * t); },
            [t](const SinusoidalLog& s) {
                // g'' = g (d^2 + d') with d = a w cos(arg), d' = -a w^2 sin(arg)
                const double arg = s.freq * t + s.phase;
                const double d = s.amp * s.freq * std::cos(arg);
                const double dprime = -s.amp * s.freq * s.freq * std::sin(arg);
                return s.c * std::exp(s.amp * std::sin(arg)) * (d * d + dprime);
            },
            [t](const OffsetSine& s) { return -s.amp * s.freq * s.freq * std::sin(s.freq * t + s.phase); },
            [t](const Polynomial& s) {
                double acc = 0.0;
                for (std::size_t j = s.coeffs.size(); j-- > 2;)
                    acc = acc * t + static_cast<double>(j * (j - 1)) * s.coeffs[j];
                return acc;
            },
            [](const StepScale&) { return 0.0; },
            [this, t](const Tabulated&) { return fd_second_derivative(t); },
            [this, t](const std::shared_ptr<const Custom>& s) {
                return s->d2f ? s->d2f(t) : fd_second_derivative(t);
            },
        },
        spec_);
}

bool ScalarSignal::analytic() const {
    if (std::holds_alternative<Tabulated>(spec_)) return false;
    if (const auto* c = std::get_if<std::shared_ptr<const Custom>>(&spec_)) return (*c)->df && (*c)->d2f;
    return true;
}

std::string ScalarSignal::describe() const {
    std::ostringstream os;
    os.precision(17);
    std::visit(overloaded{
                   [&](const Constant& s) { os << "constant(c=" << s.c << ")"; },
                   [&](const Exponential& s) { os << "exponential(c=" << s.c << ";rate=" << s.rate << ")"; },
                   [&](const SinusoidalLog& s) {
                       os << "sinusoidal-log(c=" << s.c << ";amp=" << s.amp << ";freq=" << s.freq
                          << ";phase=" << s.phase << ")";
                   },
                   [&](const OffsetSine& s) {
                       os << "offset-sine(offset=" << s.offset << ";amp=" << s.amp << ";freq=" << s.freq
                          << ";phase=" << s.phase << ")";
                   },
                   [&](const Polynomial& s) {
                       os << "polynomial(";
                       for (std::size_t j = 0; j < s.coeffs.size(); ++j) os << (j ? ";" : "") << s.coeffs[j];
                       os << ")";
                   },
                   [&](const StepScale& s) {
                       os << "step-scale(c=" << s.c;
                       for (const auto& [time, m] : s.breakpoints) os << ";" << time << ":" << m;
                       os << ")";
                   },
                   [&](const Tabulated& s) {
                       os << "tabulated(t0=" << s.t0 << ";dt=" << s.dt << ";n=" << s.values.size() << ")";
                   },
                   [&](const std::shared_ptr<const Custom>&) { os << "custom"; },
               },
               spec_);
    return os.str();
}

GradientSignal::GradientSignal(std::vector<ScalarSignal> coords) : coords_(std::move(coords)) {
    if (coords_.empty()) throw StructuralError("gradient signal needs at least one coordinate");
}

GradientSignal GradientSignal::uniform(const ScalarSignal& coord, std::size_t dim) {
    return GradientSignal(std::vector<ScalarSignal>(dim, coord));
}

std::vector<double> GradientSignal::value(double t) const {
    std::vector<double> out(coords_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = coords_[i].value(t);
    return out;
}

std::vector<double> GradientSignal::derivative(double t) const {
    std::vector<double> out(coords_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = coords_[i].derivative(t);
    return out;
}

std::vector<double> GradientSignal::second_derivative(double t) const {
    std::vector<double> out(coords_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = coords_[i].second_derivative(t);
    return out;
}

std::string GradientSignal::describe() const {
    if (coords_.empty()) return "empty";
    const bool same = std::all_of(coords_.begin(), coords_.end(),
                                  [&](const ScalarSignal& s) { return s.describe() == coords_[0].describe(); });
    if (same) return coords_[0].describe() + (coords_.size() > 1 ? " x" + std::to_string(coords_.size()) : "");
    std::string out;
    for (std::size_t i = 0; i < coords_.size(); ++i) out += (i ? " | " : "") + coords_[i].describe();
    return out;
}

}  // namespace scalelab
