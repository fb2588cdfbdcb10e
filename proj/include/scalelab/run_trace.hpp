#pragma once

#include "scalelab/optimizer.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace scalelab {

/// Per-step record of an optimizer run: loss (training) or gradient multiplier (rescale experiments) and ||R_k||_2.
struct RunTrace {
    std::vector<std::uint64_t> step;
    std::vector<double> loss;        ///< empty for rescale experiments
    std::vector<double> multiplier;  ///< empty for training runs
    std::vector<double> norm_r;
    OptimizerConfig config;
    std::uint64_t seed = 0;
    std::string problem;
    /// Set when a non-finite loss or gradient stopped the run early.
    bool diverged = false;

    std::size_t size() const noexcept { return norm_r.size(); }
};

}  // namespace scalelab
