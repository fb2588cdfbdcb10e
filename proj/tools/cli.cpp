#include "cli.hpp"

#include "scalelab/drift.hpp"
#include "scalelab/error.hpp"
#include "scalelab/flow.hpp"
#include "scalelab/invariance.hpp"
#include "scalelab/io.hpp"
#include "scalelab/metrics.hpp"
#include "scalelab/parallel.hpp"
#include "scalelab/training.hpp"
#include "scalelab/version.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace scalelab::cli {

namespace fs = std::filesystem;
using io::format_double;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string join(const std::vector<double>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + format_double(xs[i]);
    return s;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    return f;
}

void prepare_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
}

// ---- flow ------------------------------------------------------------------

struct FlowArgs {
    std::string signal;
    std::vector<double> delta0{0.05};
    double scale = 1.0;
    double amp = 0.1;
    double freq = 1.0;
    double offset = 2.0;
    double tau1 = 1.0;
    double tau2 = 1.0;
    double t_end = 50.0;
    double h = 0.0;
    std::size_t dim = 1;
    std::size_t stride = 1;
    std::string init = "steady";
    std::string out_dir = ".";
    bool plot = false;
};

GradientSignal make_signal(const FlowArgs& a, double delta0) {
    ScalarSignal s = ScalarSignal::constant(a.scale);
    if (a.signal == "const") {
        s = ScalarSignal::constant(a.scale);
    } else if (a.signal == "exp") {
        s = ScalarSignal::exponential(a.scale, delta0);
    } else if (a.signal == "sinlog") {
        s = ScalarSignal::sinusoidal_log(a.scale, a.amp, a.freq);
    } else if (a.signal == "sine") {
        s = ScalarSignal::offset_sine(a.offset, a.amp, a.freq);
    } else {
        throw UsageError("unknown signal '" + a.signal + "'");
    }
    return GradientSignal::uniform(s, a.dim);
}

void check_flow_args(const FlowArgs& a) {
    if (!(a.tau1 > 0.0) || !(a.tau2 > 0.0)) throw UsageError("--tau1 and --tau2 must be positive");
    if (!(a.t_end > 0.0)) throw UsageError("--t-end must be positive");
    if (a.h < 0.0) throw UsageError("--step must be nonnegative");
    if (a.dim < 1) throw UsageError("--dim must be at least 1");
    if (a.stride < 1) throw UsageError("--stride must be at least 1");
    if (a.init != "steady" && a.init != "zero") throw UsageError("--init must be steady or zero");
    if (a.delta0.empty()) throw UsageError("--delta0 needs at least one value");
    if (a.signal != "exp" && a.delta0.size() > 1) throw UsageError("several --delta0 values need --signal exp");
}

int cmd_flow(const FlowArgs& a, std::ostream& out) {
    check_flow_args(a);
    const auto start = Clock::now();
    const fs::path dir(a.out_dir);
    prepare_dir(dir);

    TimeScales ts;
    ts.tau1 = a.tau1;
    ts.tau2 = a.tau2;
    const double h = a.h > 0.0 ? a.h : ts.default_step();

    io::RunManifest manifest;
    manifest.command = "flow";
    manifest.version = std::string(kVersion);
    manifest.config = {{"signal", a.signal},          {"delta0", join(a.delta0)},  {"scale", format_double(a.scale)},
                       {"amp", format_double(a.amp)}, {"freq", format_double(a.freq)},
                       {"offset", format_double(a.offset)},
                       {"tau1", format_double(a.tau1)}, {"tau2", format_double(a.tau2)},
                       {"t_end", format_double(a.t_end)}, {"h", format_double(h)},
                       {"dim", std::to_string(a.dim)}, {"stride", std::to_string(a.stride)}, {"init", a.init}};

    std::vector<RemainderReport> reports;
    std::vector<io::SvgSeries> series;
    const bool many = a.delta0.size() > 1;
    const std::size_t runs = a.signal == "exp" ? a.delta0.size() : 1;
    for (std::size_t i = 0; i < runs; ++i) {
        const double d0 = a.delta0[i];
        const auto signal = make_signal(a, d0);
        FlowState state = a.init == "steady" ? steady_state_init(signal, ts, 0.0)
                                             : FlowState::uniform(a.dim, 0.0, 0.0, 0.0);
        if (a.init == "zero") {
            // v = 0 lies outside the flow's domain, so only m starts at zero.
            const auto g = signal.value(0.0);
            for (std::size_t j = 0; j < a.dim; ++j) state.v[j] = g[j] * g[j];
        }
        const auto trace = integrate_flow(signal, ts, state, a.t_end, h, a.stride);
        const std::string name = many ? "flow_trace_" + std::to_string(i) + ".csv" : "flow_trace.csv";
        {
            auto f = open_out(dir / name);
            io::write_flow_trace(f, trace);
        }
        manifest.add_file(dir, name);

        if (a.t_end > ts.burn_in()) {
            RemainderReport rep = measure_remainder(trace, signal, ts);
            rep.delta0 = a.signal == "exp" ? d0 : std::numeric_limits<double>::quiet_NaN();
            reports.push_back(rep);
        }

        const auto& last = trace.samples.back();
        out << "signal=" << signal.describe() << " t=" << format_double(last.t)
            << " norm_R=" << format_double(last.norm_r());
        if (a.signal == "exp") {
            const auto gains = steady_state_exponential_gains(d0, ts);
            out << " predicted_R=" << format_double(gains.r * std::sqrt(static_cast<double>(a.dim)));
        }
        out << '\n';

        io::SvgSeries s;
        s.label = many ? "delta0=" + format_double(d0) : signal.describe();
        for (const auto& smp : trace.samples) {
            s.x.push_back(smp.t);
            s.y.push_back(smp.norm_r());
        }
        series.push_back(std::move(s));
    }

    if (reports.size() > 1) fit_remainder_order(reports);
    if (!reports.empty()) {
        {
            auto f = open_out(dir / "remainder.csv");
            io::write_remainder_reports(f, reports);
        }
        manifest.add_file(dir, "remainder.csv");
        for (const auto& r : reports) {
            out << "remainder";
            if (!std::isnan(r.delta0)) out << " delta0=" << format_double(r.delta0);
            out << " m=" << format_double(r.m.max_abs_remainder) << " (bound " << format_double(r.m.bound) << ")"
                << " v=" << format_double(r.v.max_abs_remainder) << " (bound " << format_double(r.v.bound) << ")"
                << " R=" << format_double(r.r.max_abs_remainder);
            if (!std::isnan(r.r.fitted_order)) out << " order_R=" << format_double(r.r.fitted_order);
            out << '\n';
        }
    } else {
        out << "t-end does not exceed the burn-in " << format_double(ts.burn_in()) << "; no remainder report\n";
    }

    if (a.plot) {
        {
            auto f = open_out(dir / "flow.svg");
            io::write_svg_chart(f, series, "Adam flow update norm", "t", "||R||");
        }
        manifest.add_file(dir, "flow.svg");
    }
    manifest.duration_seconds = seconds_since(start);
    manifest.write(dir);
    return kExitOk;
}

// ---- probe -----------------------------------------------------------------

struct ProbeArgs {
    std::string method = "adam";
    std::vector<double> lambdas{0.1, 2.0, 10.0};
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    bool bias_correction = false;
    std::vector<double> m{1.0};
    std::vector<double> v{1.0};
    std::vector<double> g{1.0};
    std::uint64_t k = 1;
    bool step_scale = false;
    double factor = 10.0;
    std::uint64_t jump = 20000;
    std::size_t steps = 40000;
    std::vector<double> betas{0.9, 0.95, 0.99, 0.999};
    std::size_t threads = 0;
    std::string out_dir = ".";
    bool plot = false;
};

OptimizerConfig probe_config(const ProbeArgs& a) {
    OptimizerConfig c;
    c.beta1 = a.beta1;
    c.beta2 = a.beta2;
    c.epsilon = a.epsilon;
    c.bias_correction = a.bias_correction;
    c.eta = 1e-3;
    try {
        c.method = parse_method(a.method);
        c.validate();
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
    return c;
}

int cmd_probe_rescale(const ProbeArgs& a, const fs::path& dir, io::RunManifest& manifest, std::ostream& out) {
    for (double l : a.lambdas) {
        if (!(l > 0.0) || !std::isfinite(l)) throw UsageError("--lambdas must all be positive and finite");
    }
    if (a.lambdas.empty()) throw UsageError("--lambdas needs at least one value");
    if (a.m.size() != a.g.size() || a.v.size() != a.g.size())
        throw UsageError("--m, --v and --g must have the same length");
    const OptimizerConfig config = probe_config(a);

    MomentState state;
    state.m = a.m;
    state.v = a.v;
    state.theta.assign(a.g.size(), 0.0);
    state.k = a.k;
    const auto res = exact_invariance_probe(config.method, state, a.g, a.lambdas, config);
    {
        auto f = open_out(dir / "probe.csv");
        io::write_probe(f, res);
    }
    manifest.add_file(dir, "probe.csv");
    out << "method=" << a.method << " classification=" << to_string(res.classification) << '\n';
    for (std::size_t i = 0; i < res.lambdas.size(); ++i) {
        out << "lambda=" << format_double(res.lambdas[i]) << " deviation=" << format_double(res.deviations[i])
            << " R=" << format_double(res.rescaled[i].r.front()) << '\n';
    }
    return kExitOk;
}

int cmd_probe_step_scale(const ProbeArgs& a, const fs::path& dir, io::RunManifest& manifest, std::ostream& out) {
    if (!(a.factor > 0.0)) throw UsageError("--factor must be positive");
    if (a.jump < 1 || a.jump >= a.steps) throw UsageError("--jump must lie inside (0, --steps)");
    if (a.betas.empty()) throw UsageError("--betas needs at least one value");
    for (double b : a.betas) {
        if (!(b > 0.0 && b < 1.0)) throw UsageError("--betas values must lie in (0, 1)");
    }
    OptimizerConfig base = probe_config(a);
    StepScaleExperiment exp;
    exp.scale_factors = {{a.jump, a.factor}};
    const auto rows = step_scale_grid(exp, base, a.betas, a.steps, a.jump, a.threads);
    {
        auto f = open_out(dir / "step_scale.csv");
        io::write_transient_summary(f, rows);
    }
    manifest.add_file(dir, "step_scale.csv");
    for (const auto& r : rows) {
        out << "beta1=" << format_double(r.beta1) << " beta2=" << format_double(r.beta2)
            << " transient=" << format_double(r.transient_integral) << " peak=" << format_double(r.peak_excursion)
            << " final=" << format_double(r.final_norm) << '\n';
    }
    if (a.plot) {
        std::vector<io::SvgSeries> series;
        for (double b1 : a.betas) {
            for (double b2 : a.betas) {
                OptimizerConfig cfg = base;
                cfg.beta1 = b1;
                cfg.beta2 = b2;
                const auto trace = run_step_scale_experiment(exp, cfg, a.steps);
                io::SvgSeries s;
                s.label = "b1=" + format_double(b1) + " b2=" + format_double(b2);
                for (std::size_t k = a.jump > 50 ? a.jump - 50 : 0; k < trace.size(); ++k) {
                    s.x.push_back(static_cast<double>(k));
                    s.y.push_back(trace.norm_r[k]);
                }
                series.push_back(std::move(s));
            }
        }
        auto f = open_out(dir / "step_scale.svg");
        io::write_svg_chart(f, series, "Update norm after a gradient rescale", "step", "||R||");
        f.close();
        manifest.add_file(dir, "step_scale.svg");
    }
    return kExitOk;
}

int cmd_probe(const ProbeArgs& a, std::ostream& out) {
    const auto start = Clock::now();
    const fs::path dir(a.out_dir);
    prepare_dir(dir);
    io::RunManifest manifest;
    manifest.command = a.step_scale ? "probe --step-scale" : "probe";
    manifest.version = std::string(kVersion);
    manifest.config = {{"method", a.method},
                       {"beta1", format_double(a.beta1)},
                       {"beta2", format_double(a.beta2)},
                       {"epsilon", format_double(a.epsilon)},
                       {"bias_correction", a.bias_correction ? "true" : "false"}};
    if (a.step_scale) {
        manifest.config["factor"] = format_double(a.factor);
        manifest.config["jump"] = std::to_string(a.jump);
        manifest.config["steps"] = std::to_string(a.steps);
        manifest.config["betas"] = join(a.betas);
    } else {
        manifest.config["lambdas"] = join(a.lambdas);
        manifest.config["m"] = join(a.m);
        manifest.config["v"] = join(a.v);
        manifest.config["g"] = join(a.g);
        manifest.config["k"] = std::to_string(a.k);
    }
    const int rc = a.step_scale ? cmd_probe_step_scale(a, dir, manifest, out) : cmd_probe_rescale(a, dir, manifest, out);
    manifest.duration_seconds = seconds_since(start);
    manifest.write(dir);
    return rc;
}

// ---- sweep -----------------------------------------------------------------

struct SweepArgs {
    std::vector<std::string> problems{"logistic"};
    std::size_t seeds = 3;
    std::uint64_t first_seed = 0;
    std::size_t steps = 5000;
    std::size_t window = 200;
    std::string metric = "omega1";
    std::vector<double> betas{0.9, 0.99, 0.999};
    double eta = 1e-3;
    double epsilon = 1e-8;
    bool no_bias_correction = false;
    std::size_t batch = 0;
    std::size_t threads = 0;
    bool no_traces = false;
    std::string out_dir = ".";
    bool plot = false;
};

OmegaMetric parse_metric(const std::string& name) {
    if (name == "omega1") return OmegaMetric::omega1;
    if (name == "omega2") return OmegaMetric::omega2;
    throw UsageError("--metric must be omega1 or omega2");
}

void print_report(std::ostream& out, const std::string& label, const OscillationGridReport& r) {
    out << label << ": K=" << r.k << " N=" << r.n << " rate=" << format_double(r.rate)
        << " p=" << format_double(r.p_value);
    if (r.degenerate_rows) out << " degenerate_rows=" << r.degenerate_rows;
    out << '\n';
}

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
    const auto start = Clock::now();
    if (a.seeds < 1) throw UsageError("--seeds must be at least 1");
    if (a.steps < 3) throw UsageError("--steps must be at least 3");
    if (a.window < 1) throw UsageError("--window must be at least 1");
    if (a.betas.empty()) throw UsageError("--betas needs at least one value");
    for (double b : a.betas) {
        if (!(b > 0.0 && b < 1.0)) throw UsageError("--betas values must lie in (0, 1)");
    }
    auto sorted = a.betas;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw UsageError("--betas values must be distinct");
    if (!(a.eta > 0.0)) throw UsageError("--eta must be positive");
    if (!(a.epsilon >= 0.0)) throw UsageError("--epsilon must be nonnegative");
    std::vector<ProblemKind> kinds;
    for (const auto& p : a.problems) {
        try {
            kinds.push_back(parse_problem_kind(p));
        } catch (const std::exception&) {
            throw UsageError("unknown problem '" + p + "'");
        }
    }

    SweepOptions opt;
    opt.beta_axis = a.betas;
    opt.seeds.clear();
    for (std::size_t s = 0; s < a.seeds; ++s) opt.seeds.push_back(a.first_seed + s);
    opt.steps = a.steps;
    opt.batch_size = a.batch;
    opt.window = a.window;
    opt.metric = parse_metric(a.metric);
    opt.base.eta = a.eta;
    opt.base.epsilon = a.epsilon;
    opt.base.bias_correction = !a.no_bias_correction;
    opt.threads = a.threads;
    opt.keep_traces = !a.no_traces || a.plot;

    const fs::path dir(a.out_dir);
    prepare_dir(dir);
    io::RunManifest manifest;
    manifest.command = "sweep";
    manifest.version = std::string(kVersion);
    manifest.seeds = opt.seeds;
    std::string problems;
    for (const auto& p : a.problems) problems += (problems.empty() ? "" : ",") + p;
    manifest.config = {{"problems", problems},
                       {"steps", std::to_string(a.steps)},
                       {"window", std::to_string(a.window)},
                       {"metric", a.metric},
                       {"betas", join(a.betas)},
                       {"eta", format_double(a.eta)},
                       {"epsilon", format_double(a.epsilon)},
                       {"bias_correction", a.no_bias_correction ? "false" : "true"},
                       {"batch", std::to_string(a.batch)}};

    std::vector<OscillationGridReport> reports;
    for (ProblemKind kind : kinds) {
        const auto problem = make_problem(kind);
        const auto result = sweep_grid(*problem, opt);
        const std::string name(to_string(kind));
        const auto rows = io::omega_rows(result);
        {
            auto f = open_out(dir / ("omega_" + name + ".csv"));
            io::write_omega_rows(f, rows);
        }
        manifest.add_file(dir, "omega_" + name + ".csv");
        {
            auto f = open_out(dir / ("summary_" + name + ".csv"));
            io::write_report_summary(f, result.report);
        }
        manifest.add_file(dir, "summary_" + name + ".csv");
        if (!a.no_traces) {
            prepare_dir(dir / "traces");
            for (const auto& c : result.cells) {
                const std::string rel = "traces/" + name + "_b1_" + format_double(c.beta1) + "_b2_" +
                                        format_double(c.beta2) + "_seed_" + std::to_string(c.seed) + ".csv";
                {
                    auto f = open_out(dir / rel);
                    io::write_run_trace(f, c.trace);
                }
                manifest.add_file(dir, rel);
            }
        }
        if (a.plot) {
            std::vector<io::SvgSeries> series;
            for (const auto& c : result.cells) {
                if (c.seed != opt.seeds.front()) continue;
                io::SvgSeries s;
                s.label = "b1=" + format_double(c.beta1) + " b2=" + format_double(c.beta2);
                const auto smooth = ema_smooth(c.trace.norm_r, a.window);
                for (std::size_t k = 0; k < smooth.values.size(); ++k) {
                    s.x.push_back(static_cast<double>(k));
                    s.y.push_back(smooth.values[k]);
                }
                series.push_back(std::move(s));
            }
            const std::string rel = "norm_r_" + name + ".svg";
            auto f = open_out(dir / rel);
            io::write_svg_chart(f, series, "Smoothed update norm (" + name + ", seed " +
                                               std::to_string(opt.seeds.front()) + ")",
                                "step", "EMA ||R||");
            f.close();
            manifest.add_file(dir, rel);
        }
        print_report(out, name, result.report);
        reports.push_back(result.report);
    }
    if (reports.size() > 1) {
        const auto combined = combine_reports(reports);
        {
            auto f = open_out(dir / "summary.csv");
            io::write_report_summary(f, combined);
        }
        manifest.add_file(dir, "summary.csv");
        print_report(out, "combined", combined);
    }
    manifest.duration_seconds = seconds_since(start);
    manifest.write(dir);
    return kExitOk;
}

// ---- report ----------------------------------------------------------------

struct ReportArgs {
    std::vector<std::string> inputs;
    std::string metric = "omega1";
    bool aggregate = false;
    std::string out;
};

int cmd_report(const ReportArgs& a, std::ostream& out) {
    const OmegaMetric metric = parse_metric(a.metric);
    std::vector<OscillationGridReport> reports;
    for (const auto& path : a.inputs) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ParseError("cannot open " + path, 0);
        std::vector<io::OmegaRow> rows;
        try {
            rows = io::read_omega_rows(in);
        } catch (const ParseError& e) {
            throw ParseError(path + ": " + e.what(), e.line());
        }
        auto grids = io::grids_from_rows(rows, metric);
        if (a.aggregate) grids.grids = {average_grids(grids.grids)};
        auto report = grid_report(grids.grids, grids.beta_axis);
        print_report(out, path + (a.aggregate ? " (seed-averaged grid)" : ""), report);
        reports.push_back(std::move(report));
    }
    const auto combined = reports.size() > 1 ? combine_reports(reports) : reports.front();
    if (reports.size() > 1) print_report(out, "combined", combined);
    if (!a.out.empty()) {
        const fs::path p(a.out);
        if (p.has_parent_path()) prepare_dir(p.parent_path());
        auto f = open_out(p);
        io::write_report_summary(f, combined);
    }
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Adam gradient-scale invariance lab", "scale_lab"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    FlowArgs fa;
    auto* flow = app.add_subcommand("flow", "Integrate the continuous Adam flow for a named signal");
    flow->add_option("--signal", fa.signal, "Gradient signal")
        ->required()
        ->check(CLI::IsMember({"const", "exp", "sinlog", "sine"}));
    flow->add_option("--delta0", fa.delta0, "Log drift of the exp signal; several values fit the remainder order")
        ->delimiter(',');
    flow->add_option("--scale", fa.scale, "Signal magnitude c");
    flow->add_option("--amp", fa.amp, "Oscillation amplitude (sinlog, sine)");
    flow->add_option("--freq", fa.freq, "Oscillation frequency (sinlog, sine)");
    flow->add_option("--offset", fa.offset, "Offset of the sine signal");
    flow->add_option("--tau1", fa.tau1, "First-moment relaxation time");
    flow->add_option("--tau2", fa.tau2, "Second-moment relaxation time");
    flow->add_option("--t-end", fa.t_end, "Integration horizon");
    flow->add_option("--step", fa.h, "RK4 step (default min(tau)/50)");
    flow->add_option("--dim", fa.dim, "Number of identical coordinates");
    flow->add_option("--stride", fa.stride, "Record every n-th step");
    flow->add_option("--init", fa.init, "steady or zero")->check(CLI::IsMember({"steady", "zero"}));
    flow->add_option("--out-dir", fa.out_dir, "Output directory");
    flow->add_flag("--plot", fa.plot, "Also write an SVG chart");

    ProbeArgs pa;
    auto* probe = app.add_subcommand("probe", "Gradient-rescale probes at a frozen state or a step-scale experiment");
    probe->add_option("--method", pa.method, "adam, signsgd or gd")->check(CLI::IsMember({"adam", "signsgd", "gd"}));
    probe->add_option("--lambdas", pa.lambdas, "Gradient multipliers")->delimiter(',');
    probe->add_option("--beta1", pa.beta1);
    probe->add_option("--beta2", pa.beta2);
    probe->add_option("--epsilon", pa.epsilon);
    probe->add_flag("--bias-correction", pa.bias_correction);
    probe->add_option("--m", pa.m, "Frozen first moment")->delimiter(',');
    probe->add_option("--v", pa.v, "Frozen second moment")->delimiter(',');
    probe->add_option("--g", pa.g, "Gradient")->delimiter(',');
    probe->add_option("--k", pa.k, "Step counter of the frozen state");
    probe->add_flag("--step-scale", pa.step_scale, "Run the constant-gradient rescale experiment instead");
    probe->add_option("--factor", pa.factor, "Gradient multiplier applied at the jump");
    probe->add_option("--jump", pa.jump, "Step of the rescale");
    probe->add_option("--steps", pa.steps, "Total steps");
    probe->add_option("--betas", pa.betas, "Beta axis of the step-scale grid")->delimiter(',');
    probe->add_option("--threads", pa.threads);
    probe->add_option("--out-dir", pa.out_dir);
    probe->add_flag("--plot", pa.plot);

    SweepArgs sa;
    auto* sweep = app.add_subcommand("sweep", "Train every (beta1, beta2, seed) cell and test diagonal selection");
    sweep->add_option("--problem", sa.problems, "quadratic, logistic, mlp (comma-separated for a combined report)")
        ->delimiter(',');
    sweep->add_option("--seeds", sa.seeds, "Number of seeds");
    sweep->add_option("--first-seed", sa.first_seed);
    sweep->add_option("--steps", sa.steps);
    sweep->add_option("--window", sa.window, "EMA smoothing window");
    sweep->add_option("--metric", sa.metric)->check(CLI::IsMember({"omega1", "omega2"}));
    sweep->add_option("--betas", sa.betas, "Shared beta1/beta2 axis")->delimiter(',');
    sweep->add_option("--eta", sa.eta);
    sweep->add_option("--epsilon", sa.epsilon);
    sweep->add_flag("--no-bias-correction", sa.no_bias_correction);
    sweep->add_option("--batch", sa.batch, "Minibatch size (0 = problem default)");
    sweep->add_option("--threads", sa.threads, "Worker threads (default SCALE_LAB_THREADS or hardware)");
    sweep->add_flag("--no-traces", sa.no_traces, "Skip per-cell trace files");
    sweep->add_option("--out-dir", sa.out_dir);
    sweep->add_flag("--plot", sa.plot);

    ReportArgs ra;
    auto* report = app.add_subcommand("report", "Recompute diagonal rates and p-values from stored omega tables");
    report->add_option("inputs", ra.inputs, "Omega CSV files (beta1, beta2, [seed], omega1|omega2|omega)")
        ->required()
        ->check(CLI::ExistingFile);
    report->add_option("--metric", ra.metric)->check(CLI::IsMember({"omega1", "omega2"}));
    report->add_flag("--aggregate", ra.aggregate, "Average seeds into one grid before counting");
    report->add_option("--out", ra.out, "Write the summary CSV here");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*flow) return cmd_flow(fa, out);
        if (*probe) return cmd_probe(pa, out);
        if (*sweep) return cmd_sweep(sa, out);
        if (*report) return cmd_report(ra, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}

}  // namespace scalelab::cli
