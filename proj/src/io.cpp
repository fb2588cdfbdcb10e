#include "scalelab/io.hpp"

#include "scalelab/error.hpp"

#include "json.hpp"
#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>

namespace scalelab::io {

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double value = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw ParseError("not a number: '" + std::string(text) + "'", 0);
    return value;
}

long CsvTable::column(std::string_view name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<long>(it - header.begin());
}

void write_csv_row(std::ostream& os, std::span<const std::string> cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) os << ',';
        const auto& c = cells[i];
        if (c.find_first_of(",\"\r\n") == std::string::npos) {
            os << c;
        } else {
            os << '"';
            for (char ch : c) os << (ch == '"' ? "\"\"" : std::string(1, ch));
            os << '"';
        }
    }
    os << '\n';
}

CsvTable read_csv(std::istream& is) {
    const std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    CsvTable table;
    std::vector<std::string> row;
    std::string cell;
    bool quoted = false;
    bool row_has_content = false;
    std::size_t line = 1;
    std::size_t row_line = 1;

    auto finish_row = [&] {
        row.push_back(std::move(cell));
        cell.clear();
        const bool blank = row.size() == 1 && row[0].empty() && !row_has_content;
        if (!blank) {
            if (table.header.empty()) {
                table.header = std::move(row);
            } else {
                if (row.size() != table.header.size())
                    throw ParseError("expected " + std::to_string(table.header.size()) + " fields, found " +
                                         std::to_string(row.size()),
                                     row_line);
                table.rows.push_back(std::move(row));
                table.row_lines.push_back(row_line);
            }
        }
        row.clear();
        row_has_content = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char ch = text[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                if (ch == '\n') ++line;
                cell += ch;
            }
            continue;
        }
        switch (ch) {
            case '"':
                quoted = true;
                row_has_content = true;
                break;
            case ',':
                row.push_back(std::move(cell));
                cell.clear();
                row_has_content = true;
                break;
            case '\r':
                break;
            case '\n':
                finish_row();
                ++line;
                row_line = line;
                break;
            default:
                cell += ch;
                row_has_content = true;
        }
    }
    if (quoted) throw ParseError("unterminated quoted field", row_line);
    if (!cell.empty() || !row.empty() || row_has_content) finish_row();
    if (table.header.empty()) throw ParseError("empty CSV input", 1);
    return table;
}

CsvTable read_csv_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string(), 0);
    return read_csv(in);
}

namespace {

void write_header_indexed(std::vector<std::string>& header, const char* prefix, std::size_t d) {
    for (std::size_t i = 0; i < d; ++i) header.push_back(std::string(prefix) + "_" + std::to_string(i));
}

double cell_double(const CsvTable& t, std::size_t row, long col) {
    try {
        return parse_double(t.rows[row][static_cast<std::size_t>(col)]);
    } catch (const ParseError& e) {
        throw ParseError(std::string(e.what()) + " in column '" + t.header[static_cast<std::size_t>(col)] + "'",
                         t.row_lines[row]);
    }
}

std::uint64_t cell_uint(const CsvTable& t, std::size_t row, long col) {
    const double v = cell_double(t, row, col);
    if (!(v >= 0.0) || v != std::floor(v) || v > 9.007199254740992e15)
        throw ParseError("expected a nonnegative integer in column '" + t.header[static_cast<std::size_t>(col)] + "'",
                         t.row_lines[row]);
    return static_cast<std::uint64_t>(v);
}

long require_column(const CsvTable& t, std::string_view name) {
    const long c = t.column(name);
    if (c < 0) throw ParseError("missing column '" + std::string(name) + "'", 1);
    return c;
}

}  // namespace

void write_flow_trace(std::ostream& os, const FlowTrace& trace) {
    const std::size_t d = trace.samples.empty() ? 0 : trace.samples.front().m.size();
    std::vector<std::string> header{"t"};
    write_header_indexed(header, "m", d);
    write_header_indexed(header, "v", d);
    write_header_indexed(header, "R", d);
    header.emplace_back("norm_R");
    write_csv_row(os, header);
    std::vector<std::string> cells;
    for (const auto& s : trace.samples) {
        cells.clear();
        cells.push_back(format_double(s.t));
        for (double x : s.m) cells.push_back(format_double(x));
        for (double x : s.v) cells.push_back(format_double(x));
        for (double x : s.r) cells.push_back(format_double(x));
        cells.push_back(format_double(s.norm_r()));
        write_csv_row(os, cells);
    }
}

void write_remainder_reports(std::ostream& os, std::span<const RemainderReport> reports) {
    write_csv_row(os, std::vector<std::string>{"channel", "delta0", "remainder", "bound", "fitted_order"});
    for (const auto& rep : reports) {
        for (Channel c : {Channel::m, Channel::v, Channel::r}) {
            const auto& ch = rep.channel(c);
            write_csv_row(os, std::vector<std::string>{std::string(to_string(c)), format_double(rep.delta0),
                                                       format_double(ch.max_abs_remainder), format_double(ch.bound),
                                                       format_double(ch.fitted_order)});
        }
    }
}

void write_run_trace(std::ostream& os, const RunTrace& trace) {
    const bool rescale = !trace.multiplier.empty();
    write_csv_row(os, std::vector<std::string>{"step", rescale ? "multiplier" : "loss", "norm_R"});
    for (std::size_t k = 0; k < trace.size(); ++k) {
        const double middle = rescale ? trace.multiplier[k] : (k < trace.loss.size() ? trace.loss[k] : 0.0);
        write_csv_row(os, std::vector<std::string>{std::to_string(trace.step[k]), format_double(middle),
                                                   format_double(trace.norm_r[k])});
    }
}

RunTrace read_run_trace(std::istream& is) {
    const auto t = read_csv(is);
    const long step = require_column(t, "step");
    const long norm = require_column(t, "norm_R");
    const long loss = t.column("loss");
    const long mult = t.column("multiplier");
    RunTrace trace;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        trace.step.push_back(cell_uint(t, r, step));
        trace.norm_r.push_back(cell_double(t, r, norm));
        if (loss >= 0) trace.loss.push_back(cell_double(t, r, loss));
        if (mult >= 0) trace.multiplier.push_back(cell_double(t, r, mult));
    }
    return trace;
}

void write_transient_summary(std::ostream& os, std::span<const TransientSummary> rows) {
    write_csv_row(os, std::vector<std::string>{"beta1", "beta2", "transient_integral", "peak_excursion"});
    for (const auto& r : rows) {
        write_csv_row(os, std::vector<std::string>{format_double(r.beta1), format_double(r.beta2),
                                                   format_double(r.transient_integral),
                                                   format_double(r.peak_excursion)});
    }
}

void write_probe(std::ostream& os, const RescaleProbeResult& probe) {
    write_csv_row(os, std::vector<std::string>{"lambda", "deviation", "linear_deviation", "classification"});
    for (std::size_t i = 0; i < probe.lambdas.size(); ++i) {
        write_csv_row(os, std::vector<std::string>{format_double(probe.lambdas[i]), format_double(probe.deviations[i]),
                                                   format_double(probe.linear_deviations[i]),
                                                   std::string(to_string(probe.classification))});
    }
}

void write_omega_rows(std::ostream& os, std::span<const OmegaRow> rows) {
    write_csv_row(os, std::vector<std::string>{"beta1", "beta2", "seed", "omega1", "omega2", "window"});
    for (const auto& r : rows) {
        write_csv_row(os, std::vector<std::string>{format_double(r.beta1), format_double(r.beta2),
                                                   std::to_string(r.seed), format_double(r.omega1),
                                                   format_double(r.omega2), std::to_string(r.window)});
    }
}

std::vector<OmegaRow> read_omega_rows(std::istream& is) {
    const auto t = read_csv(is);
    const long b1 = require_column(t, "beta1");
    const long b2 = require_column(t, "beta2");
    long o1 = t.column("omega1");
    if (o1 < 0) o1 = t.column("omega");
    const long o2 = t.column("omega2");
    if (o1 < 0 && o2 < 0) throw ParseError("missing column 'omega1', 'omega2' or 'omega'", 1);
    const long seed = t.column("seed");
    const long window = t.column("window");
    if (t.rows.empty()) throw ParseError("no data rows", 1);
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<OmegaRow> rows;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        OmegaRow row;
        row.beta1 = cell_double(t, r, b1);
        row.beta2 = cell_double(t, r, b2);
        row.seed = seed >= 0 ? cell_uint(t, r, seed) : 0;
        row.omega1 = o1 >= 0 ? cell_double(t, r, o1) : nan;
        row.omega2 = o2 >= 0 ? cell_double(t, r, o2) : nan;
        row.window = window >= 0 ? static_cast<std::size_t>(cell_uint(t, r, window)) : 0;
        rows.push_back(row);
    }
    return rows;
}

std::vector<OmegaRow> omega_rows(const SweepResult& sweep) {
    std::vector<OmegaRow> rows;
    rows.reserve(sweep.cells.size());
    for (const auto& c : sweep.cells) rows.push_back(OmegaRow{c.beta1, c.beta2, c.seed, c.omega1, c.omega2, c.window});
    return rows;
}

OmegaGrids grids_from_rows(std::span<const OmegaRow> rows, OmegaMetric metric) {
    if (rows.empty()) throw StructuralError("no oscillation rows");
    std::set<double> betas;
    std::set<std::uint64_t> seeds;
    for (const auto& r : rows) {
        betas.insert(r.beta1);
        seeds.insert(r.seed);
    }
    OmegaGrids out;
    out.beta_axis.assign(betas.begin(), betas.end());
    out.seeds.assign(seeds.begin(), seeds.end());
    const std::size_t nb = out.beta_axis.size();
    constexpr double unset = std::numeric_limits<double>::infinity();
    out.grids.assign(out.seeds.size(), OmegaGrid(nb, unset));
    std::vector<std::vector<bool>> filled(out.seeds.size(), std::vector<bool>(nb * nb, false));
    auto index_of = [](const auto& axis, auto value) {
        return static_cast<std::size_t>(std::lower_bound(axis.begin(), axis.end(), value) - axis.begin());
    };
    for (const auto& r : rows) {
        if (!betas.contains(r.beta2)) throw StructuralError("beta2 value missing from the beta1 axis");
        const std::size_t s = index_of(out.seeds, r.seed);
        const std::size_t i = index_of(out.beta_axis, r.beta1) * nb + index_of(out.beta_axis, r.beta2);
        if (filled[s][i]) throw StructuralError("duplicate (beta1, beta2, seed) row");
        filled[s][i] = true;
        out.grids[s].values[i] = metric == OmegaMetric::omega1 ? r.omega1 : r.omega2;
    }
    for (const auto& f : filled) {
        if (!std::all_of(f.begin(), f.end(), [](bool b) { return b; }))
            throw StructuralError("incomplete oscillation grid: some (beta1, beta2, seed) cells are missing");
    }
    return out;
}

void write_report_summary(std::ostream& os, const OscillationGridReport& report) {
    write_csv_row(os, std::vector<std::string>{"rate", "K", "N", "p_value", "degenerate_rows"});
    write_csv_row(os, std::vector<std::string>{format_double(report.rate), std::to_string(report.k),
                                               std::to_string(report.n), format_double(report.p_value),
                                               std::to_string(report.degenerate_rows)});
}

void write_svg_chart(std::ostream& os, std::span<const SvgSeries> series, std::string_view title,
                     std::string_view x_label, std::string_view y_label) {
    constexpr double width = 800, height = 480, left = 70, right = 20, top = 40, bottom = 50;
    static constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                              "#8c564b", "#e377c2", "#7f7f7f", "#17becf"};
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    }
    if (!(x1 > x0)) x1 = x0 + 1.0;
    if (!(y1 > y0)) {
        y0 -= 0.5;
        y1 += 0.5;
    }
    if (!std::isfinite(x0)) x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
    auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * (width - left - right); };
    auto py = [&](double y) { return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom); };

    os << std::setprecision(6);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title << "</text>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\"" << width - right << "\" y2=\""
       << height - bottom << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << height - bottom
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << width / 2 << "\" y=\"" << height - 12 << "\" text-anchor=\"middle\" font-size=\"12\">"
       << x_label << " [" << x0 << ", " << x1 << "]</text>\n";
    os << "<text x=\"14\" y=\"" << height / 2 << "\" font-size=\"12\" transform=\"rotate(-90 14 " << height / 2
       << ")\" text-anchor=\"middle\">" << y_label << " [" << y0 << ", " << y1 << "]</text>\n";
    for (std::size_t j = 0; j < series.size(); ++j) {
        const auto& s = series[j];
        const char* color = palette[j % std::size(palette)];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1\" points=\"";
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) os << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
        }
        os << "\"/>\n";
        os << "<text x=\"" << width - right - 150 << "\" y=\"" << top + 14 * static_cast<double>(j + 1)
           << "\" font-size=\"11\" fill=\"" << color << "\">" << s.label << "</text>\n";
    }
    os << "</svg>\n";
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string() + " for hashing");
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256: digest initialization failed");
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest, &len);
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return os.str();
}

void RunManifest::add_file(const std::filesystem::path& dir, const std::string& relative) {
    files.emplace_back(relative, sha256_file(dir / relative));
}

void RunManifest::write(const std::filesystem::path& dir) const {
    std::string seed_list;
    for (std::size_t i = 0; i < seeds.size(); ++i) seed_list += (i ? "," : "") + std::to_string(seeds[i]);
    {
        std::ofstream out(dir / "manifest.txt");
        out << "command=" << command << '\n';
        out << "version=" << version << '\n';
        out << "duration_seconds=" << format_double(duration_seconds) << '\n';
        out << "seeds=" << seed_list << '\n';
        for (const auto& [k, v] : config) out << "config." << k << '=' << v << '\n';
        for (const auto& [f, h] : files) out << "file." << f << '=' << h << '\n';
    }
    nlohmann::ordered_json j;
    j["command"] = command;
    j["version"] = version;
    j["duration_seconds"] = duration_seconds;
    j["seeds"] = seeds;
    j["config"] = config;
    j["files"] = nlohmann::ordered_json::array();
    for (const auto& [f, h] : files) j["files"].push_back({{"path", f}, {"sha256", h}});
    std::ofstream(dir / "manifest.json") << j.dump(2) << '\n';
}

RunManifest read_manifest_text(std::istream& is) {
    RunManifest m;
    std::string line;
    std::size_t n = 0;
    while (std::getline(is, line)) {
        ++n;
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("manifest line without '='", n);
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "command") {
            m.command = value;
        } else if (key == "version") {
            m.version = value;
        } else if (key == "duration_seconds") {
            m.duration_seconds = parse_double(value);
        } else if (key == "seeds") {
            std::stringstream ss(value);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                if (!tok.empty()) m.seeds.push_back(std::stoull(tok));
            }
        } else if (key.starts_with("config.")) {
            m.config[key.substr(7)] = value;
        } else if (key.starts_with("file.")) {
            m.files.emplace_back(key.substr(5), value);
        } else {
            throw ParseError("unknown manifest key '" + key + "'", n);
        }
    }
    return m;
}

}  // namespace scalelab::io
