// Python bindings for the main operations: CSV ingestion, state derivation,
// marginal fitting, the descriptive regime report, the full analysis
// pipeline, scenario simulation and the Monte Carlo table.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>
#include <vector>

#include "copred/bootstrap.hpp"
#include "copred/data.hpp"
#include "copred/dgp.hpp"
#include "copred/marginal.hpp"
#include "copred/mc.hpp"
#include "copred/report.hpp"
#include "copred/rng.hpp"

namespace py = pybind11;
using namespace copred;

namespace {

MarginalModelSpec make_spec(bool ar, bool exog, bool gjr) { return {ar, exog, gjr}; }

py::dict fit_to_dict(const MarginalFit& fit) {
    py::dict d;
    d["mu"] = fit.params.mu;
    d["phi"] = fit.params.phi;
    d["gamma"] = fit.params.gamma;
    d["omega"] = fit.params.omega;
    d["arch"] = fit.params.arch;
    d["gjr"] = fit.params.gjr;
    d["garch"] = fit.params.garch;
    d["residuals"] = fit.residuals;
    d["sigma2"] = fit.sigma2;
    d["loglik"] = fit.loglik;
    d["iterations"] = fit.iterations;
    d["converged"] = fit.converged;
    d["std_errors"] = fit.std_errors;
    return d;
}

BootstrapConfig::Bandwidth bandwidth_from_name(const std::string& name) {
    if (name == "state") return BootstrapConfig::Bandwidth::state;
    if (name == "margin1") return BootstrapConfig::Bandwidth::margin1;
    if (name == "margin2") return BootstrapConfig::Bandwidth::margin2;
    throw std::invalid_argument("bandwidth source '" + name + "' is not state, margin1 or margin2");
}

ScenarioSpec scenario_from_any(const std::string& text, int n) {
    ScenarioSpec spec;
    if (!text.empty() && text.front() == '{')
        spec = scenario_from_json(text);
    else
        spec = scenario_preset(text, n);
    if (n > 0) spec.n = n;
    spec.validate();
    return spec;
}

}  // namespace

PYBIND11_MODULE(_copred, m) {
    m.doc() = "dependence predictability testing for bivariate time series";

    py::class_<DataSet>(m, "DataSet")
        .def(py::init<>())
        .def_readwrite("dates", &DataSet::dates)
        .def_readwrite("y1", &DataSet::y1)
        .def_readwrite("y2", &DataSet::y2)
        .def_readwrite("z", &DataSet::z)
        .def("__len__", [](const DataSet& ds) { return ds.n(); });

    m.def(
        "load_csv",
        [](const std::string& path, const std::string& date_col, const std::string& y1_col,
           const std::string& y2_col, const std::string& z_col, int min_rows) {
            ColumnMap cols;
            cols.date = date_col;
            cols.y1 = y1_col;
            cols.y2 = y2_col;
            cols.z = z_col;
            IngestStats stats;
            DataSet ds = ingest_csv(path, cols, min_rows, &stats);
            return py::make_tuple(ds, stats.rows_dropped);
        },
        py::arg("path"), py::arg("date_col") = "date", py::arg("y1_col") = "y1",
        py::arg("y2_col") = "y2", py::arg("z_col") = "", py::arg("min_rows") = 250,
        "Read an aligned CSV sample; returns (dataset, rows_dropped).");

    m.def(
        "write_csv",
        [](const DataSet& ds, const std::string& path) { write_dataset_csv(ds, path); },
        py::arg("dataset"), py::arg("path"));

    m.def("derive_state", &derive_state, py::arg("dataset"),
          py::arg("rule") = "down_market",
          "Attach the predetermined state; down_market sets z_t = 1{y2_{t-1} < 0}.");

    m.def("log_returns", &log_returns, py::arg("dataset"),
          "Convert price levels to log returns, dropping the first row.");

    m.def(
        "fit_margin",
        [](const std::vector<double>& y, const std::vector<double>& z, bool ar, bool exog,
           bool gjr, int restarts, std::uint64_t seed) {
            FitOptions opts;
            opts.restarts = restarts;
            opts.seed = seed;
            return fit_to_dict(fit_marginal(y, z, make_spec(ar, exog, gjr), opts));
        },
        py::arg("y"), py::arg("z") = std::vector<double>{}, py::arg("ar") = true,
        py::arg("exog") = false, py::arg("gjr") = false, py::arg("restarts") = 3,
        py::arg("seed") = std::uint64_t{1234},
        "Gaussian QML fit of one AR(1)-GJR-GARCH margin; returns a dict.");

    m.def(
        "describe",
        [](const DataSet& ds, const std::string& state_rule, bool asset_ar, bool asset_exog,
           bool asset_gjr, bool market_ar, bool market_exog, bool market_gjr, double q_step,
           int min_regime) {
            const DataSet derived = derive_state(ds, state_rule);
            const std::vector<double> no_exog;
            const auto spec1 = make_spec(asset_ar, asset_exog, asset_gjr);
            const auto spec2 = make_spec(market_ar, market_exog, market_gjr);
            const auto fit1 = fit_marginal(derived.y1, spec1.exog ? derived.z : no_exog, spec1);
            const auto fit2 = fit_marginal(derived.y2, spec2.exog ? derived.z : no_exog, spec2);
            const auto rep = descriptive_report(fit1, fit2, derived.z, q_step, min_regime);
            py::dict d;
            d["u1"] = rep.u1;
            d["u2"] = rep.u2;
            d["regime"] = rep.regime;
            py::list regimes;
            for (const auto& s : rep.regimes) {
                py::dict r;
                r["state"] = s.state;
                r["count"] = s.count;
                r["spearman"] = s.spearman;
                r["curves_suppressed"] = s.curves_suppressed;
                r["q_lower"] = s.q_lower;
                r["lower"] = s.lower;
                r["q_upper"] = s.q_upper;
                r["upper"] = s.upper;
                regimes.append(std::move(r));
            }
            d["regimes"] = std::move(regimes);
            return d;
        },
        py::arg("dataset"), py::arg("state_rule") = "down_market", py::arg("asset_ar") = true,
        py::arg("asset_exog") = true, py::arg("asset_gjr") = true, py::arg("market_ar") = true,
        py::arg("market_exog") = false, py::arg("market_gjr") = true, py::arg("q_step") = 0.01,
        py::arg("min_regime") = 50,
        "Regime rank correlations and tail-dependence curves of the filtered sample.");

    m.def(
        "analyze_json",
        [](const DataSet& ds, double alpha, const std::vector<std::string>& regions, int B,
           std::uint64_t seed, int block_length, bool iid, int threads,
           const std::string& bandwidth_source, double grid_step, int s_stride, int min_length,
           const std::string& state_rule, bool asset_ar, bool asset_exog, bool asset_gjr,
           bool market_ar, bool market_exog, bool market_gjr, bool timings, int indent) {
            AnalysisConfig cfg;
            cfg.asset_spec = make_spec(asset_ar, asset_exog, asset_gjr);
            cfg.market_spec = make_spec(market_ar, market_exog, market_gjr);
            cfg.bootstrap.B = B;
            cfg.bootstrap.seed = seed;
            cfg.bootstrap.block_length = block_length;
            cfg.bootstrap.iid = iid;
            cfg.bootstrap.threads = threads;
            cfg.bootstrap.bandwidth_source = bandwidth_from_name(bandwidth_source);
            cfg.state_rule = state_rule;
            cfg.regions = regions;
            cfg.alpha = alpha;
            cfg.grid_step = grid_step;
            cfg.s_stride = s_stride;
            cfg.min_length = min_length;
            cfg.timings = timings;
            cfg.json_indent = indent;
            py::gil_scoped_release release;
            return run_full_analysis(ds, cfg);
        },
        py::arg("dataset"), py::arg("alpha") = 0.10,
        py::arg("regions") = std::vector<std::string>{"lower", "upper"}, py::arg("B") = 499,
        py::arg("seed") = std::uint64_t{7121}, py::arg("block_length") = 0,
        py::arg("iid") = false, py::arg("threads") = 0, py::arg("bandwidth_source") = "state",
        py::arg("grid_step") = 0.05, py::arg("s_stride") = 1, py::arg("min_length") = 250,
        py::arg("state_rule") = "down_market", py::arg("asset_ar") = true,
        py::arg("asset_exog") = true, py::arg("asset_gjr") = true, py::arg("market_ar") = true,
        py::arg("market_exog") = false, py::arg("market_gjr") = true, py::arg("timings") = false,
        py::arg("indent") = 2,
        "Full pipeline: margins, region tests, bootstrap calibration and the "
        "sequential break tree. Returns the report as a JSON string.");

    m.def(
        "simulate",
        [](const std::string& scenario, int n, std::uint64_t seed) {
            const ScenarioSpec spec = scenario_from_any(scenario, n);
            Rng rng = Rng::stream(seed, {0});
            const ScenarioDraw draw = simulate_scenario(spec, rng);
            py::dict d;
            d["y1"] = draw.y1;
            d["y2"] = draw.y2;
            d["z"] = draw.z;
            d["u1"] = draw.u1;
            d["u2"] = draw.u2;
            return d;
        },
        py::arg("scenario"), py::arg("n") = 0, py::arg("seed") = std::uint64_t{1},
        "One draw from a preset name or a scenario JSON document.");

    m.def(
        "mc_table_csv",
        [](const std::vector<std::string>& scenarios, const std::vector<int>& n_list, int reps,
           int B, double level, std::uint64_t seed, int threads, double grid_step,
           int s_stride) {
            std::vector<ScenarioSpec> specs;
            specs.reserve(scenarios.size());
            for (const auto& text : scenarios)
                specs.push_back(scenario_from_any(text, n_list.empty() ? 1000 : n_list[0]));
            McConfig cfg;
            cfg.bootstrap.B = B;
            cfg.level = level;
            cfg.seed = seed;
            cfg.threads = threads;
            cfg.grid_step = grid_step;
            cfg.s_stride = s_stride;
            py::gil_scoped_release release;
            const McTable table = run_mc_experiment(specs, n_list, reps, cfg);
            std::ostringstream out;
            write_mc_csv(table, out);
            return out.str();
        },
        py::arg("scenarios"), py::arg("n_list"), py::arg("reps"), py::arg("B") = 199,
        py::arg("level") = 0.05, py::arg("seed") = std::uint64_t{20260819},
        py::arg("threads") = 0, py::arg("grid_step") = 0.05, py::arg("s_stride") = 1,
        "Rejection-rate table over scenarios and sample sizes, as CSV text.");

    m.def(
        "block_length",
        [](const std::vector<double>& series) { return andrews_block_length(series, nullptr); },
        py::arg("series"),
        "Automatic moving-block length from the series' first autocorrelation.");

    m.attr("__version__") = "0.1.0";
}
