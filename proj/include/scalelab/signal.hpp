#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace scalelab {

/// Step of the central difference used wherever a derivative is not known in closed form.
double fd_step(double t);

/**
 * A scalar, time-parametrized gradient coordinate g(t).
 *
 * Analytic kinds return exact first and second derivatives; tabulated and
 * custom signals fall back to central differences with step fd_step(t).
 */
class ScalarSignal {
public:
    struct Constant { double c; };
    /// c * exp(rate * t)
    struct Exponential { double c; double rate; };
    /// c * exp(amp * sin(freq * t + phase)); its log drift is a pure sinusoid.
    struct SinusoidalLog { double c; double amp; double freq; double phase; };
    /// offset + amp * sin(freq * t + phase)
    struct OffsetSine { double offset; double amp; double freq; double phase; };
    /// coeffs[0] + coeffs[1] t + coeffs[2] t^2 + ...
    struct Polynomial { std::vector<double> coeffs; };
    /// Piecewise constant: multiplier of the last breakpoint with time <= t (c before the first).
    struct StepScale { double c; std::vector<std::pair<double, double>> breakpoints; };
    /// Uniform samples, cubic Hermite (Catmull-Rom) interpolation, clamped outside the table.
    struct Tabulated { double t0; double dt; std::vector<double> values; };
    struct Custom {
        std::function<double(double)> f;
        std::function<double(double)> df;   // optional
        std::function<double(double)> d2f;  // optional
    };

    static ScalarSignal constant(double c);
    static ScalarSignal exponential(double c, double rate);
    static ScalarSignal sinusoidal_log(double c, double amp, double freq, double phase = 0.0);
    static ScalarSignal offset_sine(double offset, double amp, double freq, double phase = 0.0);
    static ScalarSignal polynomial(std::vector<double> coeffs);
    static ScalarSignal step_scale(double c, std::vector<std::pair<double, double>> breakpoints);
    static ScalarSignal tabulated(double t0, double dt, std::vector<double> values);
    static ScalarSignal custom(std::function<double(double)> f, std::function<double(double)> df = {},
                               std::function<double(double)> d2f = {});

    double value(double t) const;
    double derivative(double t) const;
    double second_derivative(double t) const;
    /// Central-difference derivative regardless of kind.
    double fd_derivative(double t) const;
    double fd_second_derivative(double t) const;
    bool analytic() const;
    std::string describe() const;

private:
    using Spec = std::variant<Constant, Exponential, SinusoidalLog, OffsetSine, Polynomial, StepScale, Tabulated,
                              std::shared_ptr<const Custom>>;
    explicit ScalarSignal(Spec spec) : spec_(std::move(spec)) {}
    Spec spec_;
};

/// A vector signal g(t) in R^d, one ScalarSignal per coordinate.
class GradientSignal {
public:
    GradientSignal() = default;
    explicit GradientSignal(std::vector<ScalarSignal> coords);
    static GradientSignal uniform(const ScalarSignal& coord, std::size_t dim = 1);

    std::size_t dim() const noexcept { return coords_.size(); }
    const ScalarSignal& coord(std::size_t i) const { return coords_.at(i); }

    std::vector<double> value(double t) const;
    std::vector<double> derivative(double t) const;
    std::vector<double> second_derivative(double t) const;
    std::string describe() const;

private:
    std::vector<ScalarSignal> coords_;
};

}  // namespace scalelab
