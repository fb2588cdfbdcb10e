#include "scalelab/metrics.hpp"

#include "scalelab/error.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <limits>

namespace scalelab {

namespace mp = boost::multiprecision;

double ema_alpha(std::size_t window) {
    if (window < 1) throw DomainError("EMA window must be at least 1");
    return 2.0 / (static_cast<double>(window) + 1.0);
}

SmoothedSeries ema_smooth(std::span<const double> series, std::size_t window) {
    const double alpha = ema_alpha(window);
    if (series.empty()) throw DomainError("ema_smooth: empty series");
    SmoothedSeries out{std::vector<double>(series.begin(), series.end()), window, alpha};
    if (window == 1) return out;
    for (std::size_t k = 1; k < out.values.size(); ++k)
        out.values[k] = alpha * series[k] + (1.0 - alpha) * out.values[k - 1];
    return out;
}

double oscillation_omega1(std::span<const double> x) {
    if (x.size() < 2) throw DomainError("omega1 needs at least 2 points");
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < x.size(); ++k) sum += std::abs(x[k + 1] - x[k]);
    return sum / static_cast<double>(x.size() - 1);
}

double oscillation_omega2(std::span<const double> x) {
    if (x.size() < 3) throw DomainError("omega2 needs at least 3 points");
    double sum = 0.0;
    for (std::size_t k = 1; k + 1 < x.size(); ++k) sum += std::abs(x[k + 1] - 2.0 * x[k] + x[k - 1]);
    sum += std::abs(x[2] - 2.0 * x[1] + x[0]);  // one-sided term at the left boundary
    return sum / static_cast<double>(x.size() - 1);
}

double oscillation(OmegaMetric metric, std::span<const double> x) {
    return metric == OmegaMetric::omega1 ? oscillation_omega1(x) : oscillation_omega2(x);
}

double binomial_diagonal_test(std::uint64_t k, std::uint64_t n) {
    if (n == 0) throw DomainError("binomial test needs N >= 1");
    if (k > n) throw DomainError("binomial test needs K <= N");
    // P(X >= K) = sum_{j >= K} C(N, j) 2^(N - j) / 3^N
    mp::cpp_int numerator = 0;
    mp::cpp_int binom = 1;  // C(N, j), advanced from j = 0
    for (std::uint64_t j = 0; j <= n; ++j) {
        if (j >= k) numerator += binom * (mp::cpp_int(1) << static_cast<unsigned>(n - j));
        binom = binom * (n - j) / (j + 1);
    }
    const mp::cpp_int denominator = mp::pow(mp::cpp_int(3), static_cast<unsigned>(n));
    return mp::cpp_rational(numerator, denominator).convert_to<double>();
}

OmegaGrid::OmegaGrid(std::size_t size, std::vector<double> row_major) : n(size), values(std::move(row_major)) {
    if (values.size() != n * n) throw StructuralError("omega grid is not square");
}

std::size_t row_argmin(const OmegaGrid& grid, std::size_t row, bool* degenerate) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    auto key = [](double v) { return std::isnan(v) ? inf : v; };
    std::size_t best = 0;
    for (std::size_t c = 1; c < grid.n; ++c) {
        if (key(grid(row, c)) < key(grid(row, best))) best = c;
    }
    if (degenerate) {
        std::size_t hits = 0;
        for (std::size_t c = 0; c < grid.n; ++c) hits += key(grid(row, c)) == key(grid(row, best)) ? 1 : 0;
        *degenerate = hits > 1 || key(grid(row, best)) == inf;
    }
    return best;
}

OscillationGridReport grid_report(std::vector<OmegaGrid> omega_grids, std::vector<double> beta_axis) {
    if (omega_grids.empty() || beta_axis.empty()) throw StructuralError("grid_report: empty grid");
    for (const auto& g : omega_grids) {
        if (g.n != beta_axis.size() || g.values.size() != g.n * g.n)
            throw StructuralError("grid_report: grid size does not match the beta axis");
    }
    OscillationGridReport rep;
    rep.beta_axis = std::move(beta_axis);
    rep.omega = std::move(omega_grids);
    for (std::size_t s = 0; s < rep.omega.size(); ++s) {
        for (std::size_t row = 0; row < rep.beta_axis.size(); ++row) {
            RowSelection sel;
            sel.seed_index = s;
            sel.row = row;
            sel.argmin = row_argmin(rep.omega[s], row, &sel.degenerate);
            sel.diagonal = sel.argmin == row;
            if (sel.degenerate) {
                ++rep.degenerate_rows;
            } else {
                ++rep.n;
                rep.k += sel.diagonal ? 1 : 0;
            }
            rep.rows.push_back(sel);
        }
    }
    if (rep.n > 0) {
        rep.rate = static_cast<double>(rep.k) / static_cast<double>(rep.n);
        rep.p_value = binomial_diagonal_test(rep.k, rep.n);
    }
    return rep;
}

OmegaGrid average_grids(std::span<const OmegaGrid> grids) {
    if (grids.empty()) throw StructuralError("average_grids: no grids");
    OmegaGrid avg(grids[0].n, 0.0);
    for (const auto& g : grids) {
        if (g.n != avg.n) throw StructuralError("average_grids: grids differ in size");
        for (std::size_t j = 0; j < g.values.size(); ++j) avg.values[j] += g.values[j];
    }
    for (double& v : avg.values) v /= static_cast<double>(grids.size());
    return avg;
}

OscillationGridReport combine_reports(std::span<const OscillationGridReport> reports) {
    if (reports.empty()) throw StructuralError("combine_reports: nothing to combine");
    OscillationGridReport out;
    for (const auto& r : reports) {
        out.k += r.k;
        out.n += r.n;
        out.degenerate_rows += r.degenerate_rows;
        out.rows.insert(out.rows.end(), r.rows.begin(), r.rows.end());
    }
    out.beta_axis = reports[0].beta_axis;
    if (out.n > 0) {
        out.rate = static_cast<double>(out.k) / static_cast<double>(out.n);
        out.p_value = binomial_diagonal_test(out.k, out.n);
    }
    return out;
}

}  // namespace scalelab
