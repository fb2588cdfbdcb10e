#pragma once

#include "scalelab/drift.hpp"
#include "scalelab/flow.hpp"
#include "scalelab/invariance.hpp"
#include "scalelab/metrics.hpp"
#include "scalelab/run_trace.hpp"
#include "scalelab/training.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace scalelab::io {

/// Shortest decimal form that parses back to the same double ("nan", "inf", "-inf" for non-finite values).
std::string format_double(double x);
/// Accepts decimal or scientific notation and nan/inf in any case. Throws ParseError (line 0) otherwise.
double parse_double(std::string_view text);

/// RFC-4180 style table: a header row and string cells.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> row_lines;  ///< 1-based source line of each row

    /// Index of a column, or -1.
    long column(std::string_view name) const;
};

void write_csv_row(std::ostream& os, std::span<const std::string> cells);
/// Parses quoted fields, embedded commas, doubled quotes and CRLF. Throws ParseError on an empty input,
/// an unterminated quote or a row whose width differs from the header.
CsvTable read_csv(std::istream& is);
CsvTable read_csv_file(const std::filesystem::path& path);

/// Columns t, m_0.., v_0.., R_0.., norm_R.
void write_flow_trace(std::ostream& os, const FlowTrace& trace);
/// Columns channel, delta0, remainder, bound, fitted_order; one row per channel per report.
void write_remainder_reports(std::ostream& os, std::span<const RemainderReport> reports);
/// Columns step, multiplier, norm_R (rescale experiments) or step, loss, norm_R (training).
void write_run_trace(std::ostream& os, const RunTrace& trace);
RunTrace read_run_trace(std::istream& is);
/// Columns beta1, beta2, transient_integral, peak_excursion.
void write_transient_summary(std::ostream& os, std::span<const TransientSummary> rows);
/// Columns lambda, deviation, linear_deviation, classification.
void write_probe(std::ostream& os, const RescaleProbeResult& probe);

/// Long-format oscillation table: beta1, beta2, seed, omega1, omega2, window.
struct OmegaRow {
    double beta1 = 0.0;
    double beta2 = 0.0;
    std::uint64_t seed = 0;
    double omega1 = 0.0;
    double omega2 = 0.0;
    std::size_t window = 0;
};

void write_omega_rows(std::ostream& os, std::span<const OmegaRow> rows);
/**
 * Reads the long format. beta1 and beta2 are required; the omega column may
 * be named omega1, omega2 or omega (read as omega1); seed and window are
 * optional. Throws ParseError with the offending line number.
 */
std::vector<OmegaRow> read_omega_rows(std::istream& is);
std::vector<OmegaRow> omega_rows(const SweepResult& sweep);

/// Rebuilds per-seed grids from long-format rows; the beta axis is the sorted set of beta1 values.
struct OmegaGrids {
    std::vector<double> beta_axis;
    std::vector<std::uint64_t> seeds;
    std::vector<OmegaGrid> grids;
};
OmegaGrids grids_from_rows(std::span<const OmegaRow> rows, OmegaMetric metric);

/// Columns rate, K, N, p_value, degenerate_rows.
void write_report_summary(std::ostream& os, const OscillationGridReport& report);

/// Polyline chart of one or more series sharing the x axis.
struct SvgSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};
void write_svg_chart(std::ostream& os, std::span<const SvgSeries> series, std::string_view title,
                     std::string_view x_label, std::string_view y_label);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/**
 * Run manifest: command, flat configuration echo, seeds, version, duration
 * and the emitted files with their SHA-256. Written as key=value text and
 * as a JSON mirror.
 */
struct RunManifest {
    std::string command;
    std::map<std::string, std::string> config;
    std::vector<std::uint64_t> seeds;
    std::string version;
    double duration_seconds = 0.0;
    std::vector<std::pair<std::string, std::string>> files;  ///< (path relative to the output dir, sha256)

    void add_file(const std::filesystem::path& dir, const std::string& relative);
    void write(const std::filesystem::path& dir) const;
};

RunManifest read_manifest_text(std::istream& is);

}  // namespace scalelab::io
