#include "scalelab/drift.hpp"
#include "scalelab/error.hpp"
#include "scalelab/flow.hpp"
#include "scalelab/invariance.hpp"
#include "scalelab/metrics.hpp"
#include "scalelab/optimizer.hpp"
#include "scalelab/training.hpp"
#include "scalelab/version.hpp"

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace scalelab;

namespace {

py::dict trace_columns(const FlowTrace& trace) {
    std::vector<double> t, norm;
    std::vector<std::vector<double>> m, v, r;
    for (const auto& s : trace.samples) {
        t.push_back(s.t);
        norm.push_back(s.norm_r());
        m.push_back(s.m);
        v.push_back(s.v);
        r.push_back(s.r);
    }
    py::dict d;
    d["t"] = t;
    d["m"] = m;
    d["v"] = v;
    d["R"] = r;
    d["norm_R"] = norm;
    return d;
}

}  // namespace

PYBIND11_MODULE(_scalelab, mod) {
    mod.doc() = "Adam gradient-scale invariance lab";
    mod.attr("__version__") = std::string(kVersion);

    py::register_exception<DomainError>(mod, "DomainError", PyExc_ValueError);
    py::register_exception<StructuralError>(mod, "StructuralError", PyExc_ValueError);
    py::register_exception<ParseError>(mod, "ParseError", PyExc_ValueError);

    py::enum_<Method>(mod, "Method")
        .value("adam", Method::adam)
        .value("signsgd", Method::signsgd)
        .value("gd", Method::gd);

    py::class_<OptimizerConfig>(mod, "OptimizerConfig")
        .def(py::init([](double beta1, double beta2, double eta, double epsilon, bool bias_correction,
                         double weight_decay, Method method) {
                 return OptimizerConfig{beta1, beta2, eta, epsilon, bias_correction, weight_decay, method};
             }),
             py::arg("beta1") = 0.9, py::arg("beta2") = 0.999, py::arg("eta") = 1e-3, py::arg("epsilon") = 1e-8,
             py::arg("bias_correction") = false, py::arg("weight_decay") = 0.0, py::arg("method") = Method::adam)
        .def_readwrite("beta1", &OptimizerConfig::beta1)
        .def_readwrite("beta2", &OptimizerConfig::beta2)
        .def_readwrite("eta", &OptimizerConfig::eta)
        .def_readwrite("epsilon", &OptimizerConfig::epsilon)
        .def_readwrite("bias_correction", &OptimizerConfig::bias_correction)
        .def_readwrite("weight_decay", &OptimizerConfig::weight_decay)
        .def_readwrite("method", &OptimizerConfig::method)
        .def("validate", &OptimizerConfig::validate);

    py::class_<MomentState>(mod, "MomentState")
        .def(py::init([](std::vector<double> m, std::vector<double> v, std::vector<double> theta, std::uint64_t k) {
                 if (theta.empty()) theta.assign(m.size(), 0.0);
                 MomentState s{std::move(m), std::move(v), std::move(theta), k};
                 s.check();
                 return s;
             }),
             py::arg("m"), py::arg("v"), py::arg("theta") = std::vector<double>{}, py::arg("k") = 0)
        .def_static("zeros", &MomentState::zeros)
        .def_readwrite("m", &MomentState::m)
        .def_readwrite("v", &MomentState::v)
        .def_readwrite("theta", &MomentState::theta)
        .def_readwrite("k", &MomentState::k);

    mod.def(
        "adam_step",
        [](const MomentState& s, const std::vector<double>& g, const OptimizerConfig& c) {
            auto res = adam_step(s, g, c);
            return py::make_tuple(res.state, res.update.r);
        },
        py::arg("state"), py::arg("g"), py::arg("config") = OptimizerConfig{},
        "One Adam step; returns (new_state, R).");
    mod.def(
        "optimizer_step",
        [](const MomentState& s, const std::vector<double>& g, const OptimizerConfig& c) {
            auto res = optimizer_step(s, g, c);
            return py::make_tuple(res.state, res.update.r);
        },
        py::arg("state"), py::arg("g"), py::arg("config") = OptimizerConfig{});
    mod.def("signsgd_step", [](const std::vector<double>& g) { return signsgd_step(g).r; });
    mod.def("gd_step", [](const std::vector<double>& g) { return gd_step(g).r; });
    mod.def("constant_gradient_closed_form", &constant_gradient_closed_form, py::arg("c"), py::arg("k"),
            py::arg("beta1"), py::arg("beta2"));

    py::class_<RescaleProbeResult>(mod, "RescaleProbeResult")
        .def_readonly("lambdas", &RescaleProbeResult::lambdas)
        .def_readonly("deviations", &RescaleProbeResult::deviations)
        .def_readonly("linear_deviations", &RescaleProbeResult::linear_deviations)
        .def_property_readonly("base", [](const RescaleProbeResult& r) { return r.base.r; })
        .def_property_readonly("rescaled",
                               [](const RescaleProbeResult& r) {
                                   std::vector<std::vector<double>> out;
                                   for (const auto& u : r.rescaled) out.push_back(u.r);
                                   return out;
                               })
        .def_property_readonly("classification",
                               [](const RescaleProbeResult& r) { return std::string(to_string(r.classification)); });
    mod.def(
        "exact_invariance_probe",
        [](Method method, const MomentState& state, const std::vector<double>& g, const std::vector<double>& lambdas,
           const OptimizerConfig& config) { return exact_invariance_probe(method, state, g, lambdas, config); },
        py::arg("method"), py::arg("state"), py::arg("g"),
            py::arg("lambdas"), py::arg("config") = OptimizerConfig{});

    mod.def("tau_from_beta", &tau_from_beta, py::arg("beta"), py::arg("dt"));
    mod.def("beta_from_tau", &beta_from_tau, py::arg("tau"), py::arg("dt"));

    py::class_<TimeScales>(mod, "TimeScales")
        .def(py::init([](double tau1, double tau2, double eta_bar, double dt) {
                 TimeScales ts{tau1, tau2, eta_bar, dt};
                 ts.validate();
                 return ts;
             }),
             py::arg("tau1") = 1.0, py::arg("tau2") = 1.0, py::arg("eta_bar") = 1.0, py::arg("dt") = 0.01)
        .def_readwrite("tau1", &TimeScales::tau1)
        .def_readwrite("tau2", &TimeScales::tau2)
        .def_readwrite("eta_bar", &TimeScales::eta_bar)
        .def_readwrite("dt", &TimeScales::dt)
        .def("burn_in", &TimeScales::burn_in)
        .def("default_step", &TimeScales::default_step);

    py::class_<ScalarSignal>(mod, "ScalarSignal")
        .def_static("constant", &ScalarSignal::constant)
        .def_static("exponential", &ScalarSignal::exponential, py::arg("c"), py::arg("rate"))
        .def_static("sinusoidal_log", &ScalarSignal::sinusoidal_log, py::arg("c"), py::arg("amp"), py::arg("freq"),
                    py::arg("phase") = 0.0)
        .def_static("offset_sine", &ScalarSignal::offset_sine, py::arg("offset"), py::arg("amp"), py::arg("freq"),
                    py::arg("phase") = 0.0)
        .def_static("polynomial", &ScalarSignal::polynomial)
        .def_static("custom", &ScalarSignal::custom, py::arg("f"), py::arg("df") = nullptr, py::arg("d2f") = nullptr)
        .def("value", &ScalarSignal::value)
        .def("derivative", &ScalarSignal::derivative)
        .def("second_derivative", &ScalarSignal::second_derivative)
        .def("__repr__", &ScalarSignal::describe);

    py::class_<GradientSignal>(mod, "GradientSignal")
        .def(py::init<std::vector<ScalarSignal>>())
        .def_static("uniform", &GradientSignal::uniform, py::arg("coord"), py::arg("dim") = 1)
        .def("value", &GradientSignal::value)
        .def("dim", &GradientSignal::dim)
        .def("__repr__", &GradientSignal::describe);

    py::class_<ExponentialGains>(mod, "ExponentialGains")
        .def_readonly("m", &ExponentialGains::m)
        .def_readonly("v", &ExponentialGains::v)
        .def_readonly("r", &ExponentialGains::r);
    mod.def("steady_state_exponential_gains", &steady_state_exponential_gains, py::arg("delta0"), py::arg("ts"));

    mod.def(
        "integrate_flow",
        [](const GradientSignal& signal, const TimeScales& ts, double t_end, double h, std::size_t stride,
           bool steady_init, double m0, double v0) {
            const FlowState init = steady_init ? steady_state_init(signal, ts, 0.0)
                                               : FlowState::uniform(signal.dim(), m0, v0, 0.0);
            return trace_columns(integrate_flow(signal, ts, init, t_end, h > 0.0 ? h : ts.default_step(), stride));
        },
        py::arg("signal"), py::arg("ts"), py::arg("t_end"), py::arg("h") = 0.0, py::arg("stride") = 1,
        py::arg("steady_init") = true, py::arg("m0") = 0.0, py::arg("v0") = 1.0,
        "RK4 flow trace as columns t, m, v, R, norm_R.");
    mod.def("log_drift", &log_drift, py::arg("signal"), py::arg("t"));

    py::class_<DriftProfile>(mod, "DriftProfile")
        .def_readonly("lambda_bound", &DriftProfile::lambda_bound)
        .def_readonly("lambda_prime_bound", &DriftProfile::lambda_prime_bound);
    mod.def("drift_bounds", &drift_bounds, py::arg("signal"), py::arg("t0"), py::arg("t1"),
            py::arg("samples") = kDriftSamples);

    py::class_<SensitivityFit>(mod, "SensitivityFit")
        .def_readonly("delta0", &SensitivityFit::delta0)
        .def_readonly("deviations", &SensitivityFit::deviations)
        .def_readonly("slope", &SensitivityFit::slope)
        .def_readonly("coefficient", &SensitivityFit::coefficient);
    mod.def(
        "first_order_sensitivity",
        [](const TimeScales& ts, const std::vector<double>& grid) { return first_order_sensitivity(ts, grid); },
        py::arg("ts"), py::arg("delta0_grid"));

    py::class_<TrackingResult>(mod, "TrackingResult")
        .def_readonly("max_residual", &TrackingResult::max_residual)
        .def_readonly("transient_coeff", &TrackingResult::transient_coeff)
        .def_readonly("steady_bound", &TrackingResult::steady_bound)
        .def_readonly("min_margin", &TrackingResult::min_margin)
        .def_readonly("passed", &TrackingResult::pass);
    mod.def("tracking_check", &tracking_check, py::arg("y"), py::arg("tau"), py::arg("x0"), py::arg("t0"),
            py::arg("t1"), py::arg("h") = 0.0);

    mod.def(
        "ema_smooth", [](const std::vector<double>& x, std::size_t w) { return ema_smooth(x, w).values; },
        py::arg("series"), py::arg("window"));
    mod.def("oscillation_omega1", [](const std::vector<double>& x) { return oscillation_omega1(x); });
    mod.def("oscillation_omega2", [](const std::vector<double>& x) { return oscillation_omega2(x); });
    mod.def("binomial_diagonal_test", &binomial_diagonal_test, py::arg("k"), py::arg("n"));

    py::class_<OscillationGridReport>(mod, "OscillationGridReport")
        .def_readonly("beta_axis", &OscillationGridReport::beta_axis)
        .def_readonly("k", &OscillationGridReport::k)
        .def_readonly("n", &OscillationGridReport::n)
        .def_readonly("rate", &OscillationGridReport::rate)
        .def_readonly("p_value", &OscillationGridReport::p_value)
        .def_readonly("degenerate_rows", &OscillationGridReport::degenerate_rows);
    mod.def(
        "grid_report",
        [](const std::vector<std::vector<std::vector<double>>>& grids, std::vector<double> axis) {
            std::vector<OmegaGrid> gs;
            for (const auto& g : grids) {
                std::vector<double> flat;
                for (const auto& row : g) {
                    if (row.size() != g.size()) throw StructuralError("grid_report: grids must be square");
                    flat.insert(flat.end(), row.begin(), row.end());
                }
                gs.emplace_back(g.size(), std::move(flat));
            }
            return grid_report(std::move(gs), std::move(axis));
        },
        py::arg("grids"), py::arg("beta_axis"), "Per-seed square omega matrices (lists of rows) and their beta axis.");

    mod.def(
        "run_training",
        [](const std::string& problem, const OptimizerConfig& config, std::uint64_t seed, std::size_t steps,
           std::size_t batch) {
            const auto kind = parse_problem_kind(problem);
            const auto p = make_problem(kind);
            RunTrace t;
            {
                py::gil_scoped_release release;
                t = run_training(*p, config, seed, steps, batch);
            }
            py::dict d;
            d["loss"] = t.loss;
            d["norm_R"] = t.norm_r;
            d["diverged"] = t.diverged;
            return d;
        },
        py::arg("problem"), py::arg("config") = OptimizerConfig{}, py::arg("seed") = 0, py::arg("steps") = 1000,
        py::arg("batch_size") = 0);
    mod.def(
        "sweep",
        [](const std::string& problem, std::vector<double> beta_axis, std::vector<std::uint64_t> seeds,
           std::size_t steps, std::size_t window, const std::string& metric, double eta, std::size_t threads) {
            SweepOptions opt;
            opt.beta_axis = std::move(beta_axis);
            opt.seeds = std::move(seeds);
            opt.steps = steps;
            opt.window = window;
            if (metric == "omega1")
                opt.metric = OmegaMetric::omega1;
            else if (metric == "omega2")
                opt.metric = OmegaMetric::omega2;
            else
                throw std::invalid_argument("metric must be omega1 or omega2");
            opt.base.eta = eta;
            opt.threads = threads;
            opt.keep_traces = false;
            const auto p = make_problem(parse_problem_kind(problem));
            SweepResult r;
            {
                py::gil_scoped_release release;
                r = sweep_grid(*p, opt);
            }
            py::list cells;
            for (const auto& c : r.cells) {
                py::dict d;
                d["beta1"] = c.beta1;
                d["beta2"] = c.beta2;
                d["seed"] = c.seed;
                d["omega1"] = c.omega1;
                d["omega2"] = c.omega2;
                cells.append(d);
            }
            return py::make_tuple(r.report, cells);
        },
        py::arg("problem"), py::arg("beta_axis") = std::vector<double>{0.9, 0.99, 0.999},
        py::arg("seeds") = std::vector<std::uint64_t>{0, 1, 2}, py::arg("steps") = 5000, py::arg("window") = 200,
        py::arg("metric") = "omega1", py::arg("eta") = 1e-3, py::arg("threads") = 0,
        "Runs the beta-grid sweep; returns (report, cells).");
}
