#include "scalelab/rng.hpp"

#include <cmath>
#include <numbers>

namespace scalelab {

double CounterRng::normal() {
    const double u1 = uniform_open0();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace scalelab
