#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace scalelab {

struct SmoothedSeries {
    std::vector<double> values;
    std::size_t window = 1;
    double alpha = 1.0;
};

/// alpha = 2 / (window + 1). Throws DomainError when window < 1.
double ema_alpha(std::size_t window);

/// s_0 = x_0, s_k = alpha x_k + (1 - alpha) s_{k-1}. Window 1 returns the input unchanged.
SmoothedSeries ema_smooth(std::span<const double> series, std::size_t window);

/// Mean absolute first difference. Throws DomainError for fewer than 2 points.
double oscillation_omega1(std::span<const double> x);
inline double oscillation_omega1(const SmoothedSeries& s) { return oscillation_omega1(s.values); }

/**
 * Mean absolute second difference over T - 1 terms: the T - 2 interior
 * terms |x_{k+1} - 2 x_k + x_{k-1}| plus the one-sided boundary term, which
 * repeats the first interior stencil. Throws DomainError for fewer than 3 points.
 */
double oscillation_omega2(std::span<const double> x);
inline double oscillation_omega2(const SmoothedSeries& s) { return oscillation_omega2(s.values); }

enum class OmegaMetric { omega1, omega2 };
double oscillation(OmegaMetric metric, std::span<const double> x);

/// P(X >= K) for X ~ Binomial(N, 1/3), from exact integer arithmetic.
double binomial_diagonal_test(std::uint64_t k, std::uint64_t n);

/// Square matrix of oscillation values, rows indexed by beta1, columns by beta2.
struct OmegaGrid {
    std::size_t n = 0;
    std::vector<double> values;  ///< row-major, n * n

    OmegaGrid() = default;
    explicit OmegaGrid(std::size_t size, double fill = 0.0) : n(size), values(size * size, fill) {}
    OmegaGrid(std::size_t size, std::vector<double> row_major);

    double& operator()(std::size_t row, std::size_t col) { return values[row * n + col]; }
    double operator()(std::size_t row, std::size_t col) const { return values[row * n + col]; }
};

struct RowSelection {
    std::size_t seed_index = 0;
    std::size_t row = 0;
    std::size_t argmin = 0;
    bool diagonal = false;
    /// Minimum attained by several columns (or every entry NaN): reported, not counted in K or N.
    bool degenerate = false;
};

struct OscillationGridReport {
    std::vector<double> beta_axis;
    std::vector<OmegaGrid> omega;  ///< one grid per seed
    std::vector<RowSelection> rows;
    std::uint64_t k = 0;
    std::uint64_t n = 0;
    double rate = 0.0;
    double p_value = 1.0;
    std::size_t degenerate_rows = 0;
};

/// Argmin column of a row; NaN counts as +inf and ties go to the lowest index.
std::size_t row_argmin(const OmegaGrid& grid, std::size_t row, bool* degenerate = nullptr);

/**
 * Counts, per (row, seed), whether the oscillation-minimizing column is the
 * diagonal and attaches the one-sided Binomial(N, 1/3) tail. Throws
 * StructuralError for an empty or non-square input.
 */
OscillationGridReport grid_report(std::vector<OmegaGrid> omega_grids, std::vector<double> beta_axis);

/// Seed-averaged grid (NaN-propagating), for the aggregated reporting mode.
OmegaGrid average_grids(std::span<const OmegaGrid> grids);

/// Pools K and N over several reports and recomputes the rate and p-value.
OscillationGridReport combine_reports(std::span<const OscillationGridReport> reports);

}  // namespace scalelab
