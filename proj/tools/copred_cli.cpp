// Command-line front end: ingest aligned return series, run the dependence
// predictability test with bootstrap calibration and break dating, emit the
// descriptive analytics, or drive the simulation harness.
//
// Exit codes: 0 success, 2 data error, 3 convergence/calibration error,
// 4 configuration error.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "copred/bootstrap.hpp"
#include "copred/breaks.hpp"
#include "copred/data.hpp"
#include "copred/dgp.hpp"
#include "copred/marginal.hpp"
#include "copred/mc.hpp"
#include "copred/ranks.hpp"
#include "copred/report.hpp"
#include "copred/score.hpp"

namespace {

using nlohmann::json;

constexpr int kExitData = 2;
constexpr int kExitConvergence = 3;
constexpr int kExitConfig = 4;

class DataError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};
class ConfigError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flags shared by the subcommands that read a CSV sample.
struct InputOptions {
    std::string path;
    std::string date_col = "date";
    std::string asset_col = "asset";
    std::string market_col = "market";
    std::string state_col;
    std::string state_rule = "down_market";
    bool from_prices = false;
    int min_rows = 250;
};

void add_input_flags(CLI::App* cmd, InputOptions& in) {
    cmd->add_option("--input", in.path, "input CSV with a header row")->required();
    cmd->add_option("--date-col", in.date_col, "date column name");
    cmd->add_option("--asset-col", in.asset_col, "asset return column name");
    cmd->add_option("--market-col", in.market_col, "market return column name");
    cmd->add_option("--state-col", in.state_col, "state column name, when the file carries one");
    cmd->add_option("--state", in.state_rule,
                    "state rule: down_market or the name of the ingested state column");
    cmd->add_flag("--log-returns", in.from_prices,
                  "treat the series as price levels and take log returns");
    cmd->add_option("--min-rows", in.min_rows, "minimum usable rows after ingestion");
}

copred::DataSet load_input(const InputOptions& in) {
    copred::ColumnMap cols;
    cols.date = in.date_col;
    cols.y1 = in.asset_col;
    cols.y2 = in.market_col;
    cols.z = in.state_rule != "down_market" && in.state_col.empty() ? in.state_rule
                                                                    : in.state_col;
    copred::IngestStats stats;
    copred::DataSet ds;
    try {
        ds = copred::ingest_csv(in.path, cols, in.min_rows, &stats);
        if (in.from_prices) ds = copred::log_returns(ds);
    } catch (const std::invalid_argument& e) {
        throw DataError(e.what());
    }
    if (stats.rows_dropped > 0)
        std::cerr << "warning: dropped " << stats.rows_dropped
                  << " rows with missing or unreadable fields\n";
    return ds;
}

copred::MarginalModelSpec parse_margin(const std::string& text) {
    copred::MarginalModelSpec spec{false, false, false};
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ',')) {
        if (token == "ar")
            spec.ar = true;
        else if (token == "exog")
            spec.exog = true;
        else if (token == "gjr")
            spec.gjr = true;
        else if (token == "none" && text == "none")
            return spec;
        else
            throw ConfigError("margin term '" + token + "' is not ar, exog, gjr or none");
    }
    return spec;
}

copred::BootstrapConfig::Bandwidth parse_bandwidth(const std::string& name) {
    if (name == "state") return copred::BootstrapConfig::Bandwidth::state;
    if (name == "margin1") return copred::BootstrapConfig::Bandwidth::margin1;
    if (name == "margin2") return copred::BootstrapConfig::Bandwidth::margin2;
    throw ConfigError("bandwidth source '" + name + "' is not state, margin1 or margin2");
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << text;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// The `test` subcommand's full option set, mirrored one-to-one by the keys
// of a --config JSON document, which takes precedence over the flags.
struct TestOptions {
    InputOptions in;
    std::string asset_margin = "ar,exog,gjr";
    std::string market_margin = "ar,gjr";
    std::vector<std::string> regions{"lower", "upper"};
    double alpha = 0.10;
    double grid_step = 0.05;
    int s_stride = 1;
    int min_length = 250;
    int B = 499;
    int block_length = 0;
    bool iid = false;
    std::uint64_t seed = 7121;
    std::string bandwidth_source = "state";
    bool timings = false;
    int indent = 2;
    std::string output = "-";
    std::string config_path;
};

void apply_config_file(TestOptions& opt, const json& j) {
    auto get = [&](const char* key, auto& slot) {
        if (j.contains(key)) slot = j.at(key).get<std::decay_t<decltype(slot)>>();
    };
    get("input", opt.in.path);
    get("date_col", opt.in.date_col);
    get("asset_col", opt.in.asset_col);
    get("market_col", opt.in.market_col);
    get("state_col", opt.in.state_col);
    get("state", opt.in.state_rule);
    get("log_returns", opt.in.from_prices);
    get("min_rows", opt.in.min_rows);
    get("asset_margin", opt.asset_margin);
    get("market_margin", opt.market_margin);
    get("regions", opt.regions);
    get("alpha", opt.alpha);
    get("grid_step", opt.grid_step);
    get("s_stride", opt.s_stride);
    get("min_length", opt.min_length);
    get("B", opt.B);
    get("block_length", opt.block_length);
    get("iid", opt.iid);
    get("seed", opt.seed);
    get("bandwidth_source", opt.bandwidth_source);
    get("timings", opt.timings);
    get("indent", opt.indent);
    get("output", opt.output);
}

copred::AnalysisConfig build_analysis_config(const TestOptions& opt, int threads) {
    copred::AnalysisConfig cfg;
    cfg.asset_spec = parse_margin(opt.asset_margin);
    cfg.market_spec = parse_margin(opt.market_margin);
    cfg.state_rule = opt.in.state_rule;
    cfg.regions = opt.regions;
    cfg.alpha = opt.alpha;
    cfg.grid_step = opt.grid_step;
    cfg.s_stride = opt.s_stride;
    cfg.min_length = opt.min_length;
    cfg.bootstrap.B = opt.B;
    cfg.bootstrap.block_length = opt.block_length;
    cfg.bootstrap.iid = opt.iid;
    cfg.bootstrap.seed = opt.seed;
    cfg.bootstrap.threads = threads;
    cfg.bootstrap.bandwidth_source = parse_bandwidth(opt.bandwidth_source);
    cfg.timings = opt.timings;
    cfg.json_indent = opt.indent;
    if (cfg.regions.empty()) throw ConfigError("no regions requested");
    for (const auto& name : cfg.regions)
        if (name != "lower" && name != "upper")
            throw ConfigError("region '" + name + "' is not lower or upper");
    if (!(cfg.alpha > 0.0 && cfg.alpha < 0.5)) throw ConfigError("alpha outside (0, 0.5)");
    if (cfg.bootstrap.B < 1) throw ConfigError("B must be positive");
    return cfg;
}

int run_test(TestOptions& opt, int threads) {
    if (!opt.config_path.empty()) {
        json j;
        try {
            j = json::parse(read_file(opt.config_path));
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("config file: ") + e.what());
        }
        try {
            apply_config_file(opt, j);
        } catch (const json::exception& e) {
            throw ConfigError(std::string("config file: ") + e.what());
        }
    }
    const auto cfg = build_analysis_config(opt, threads);
    const auto ds = load_input(opt.in);
    std::string text;
    try {
        text = copred::run_full_analysis(ds, cfg);
    } catch (const copred::ConvergenceError& e) {
        throw std::runtime_error(std::string("marginal fit failed: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw DataError(e.what());
    }
    const json report = json::parse(text);
    if (report.value("degenerate_state", false))
        std::cerr << "warning: " << report.value("warning", std::string()) << '\n';
    write_output(opt.output, text);
    return 0;
}

struct MarginPair {
    copred::MarginalFit fit1, fit2;
    copred::DataSet data;
};

MarginPair fit_margins(const copred::DataSet& ds, const std::string& state_rule,
                       const copred::MarginalModelSpec& spec1,
                       const copred::MarginalModelSpec& spec2) {
    MarginPair out;
    try {
        out.data = copred::derive_state(ds, state_rule);
    } catch (const std::invalid_argument& e) {
        throw DataError(e.what());
    }
    if (copred::state_is_degenerate(out.data.z))
        throw DataError("state is constant over the sample");
    const std::vector<double> empty;
    out.fit1 = copred::fit_marginal(out.data.y1, spec1.exog ? out.data.z : empty, spec1);
    out.fit2 = copred::fit_marginal(out.data.y2, spec2.exog ? out.data.z : empty, spec2);
    return out;
}

int run_describe(const InputOptions& in, const std::string& asset_margin,
                 const std::string& market_margin, double q_step, int min_regime,
                 const std::string& ranks_out, const std::string& curves_out,
                 const std::string& output) {
    const auto spec1 = parse_margin(asset_margin);
    const auto spec2 = parse_margin(market_margin);
    const auto ds = load_input(in);
    const auto mp = fit_margins(ds, in.state_rule, spec1, spec2);
    copred::DescriptiveReport rep;
    try {
        rep = copred::descriptive_report(mp.fit1, mp.fit2, mp.data.z, q_step, min_regime);
    } catch (const std::invalid_argument& e) {
        throw DataError(e.what());
    }
    json j;
    j["schema"] = "copred-describe/1";
    j["n"] = mp.data.n();
    j["regimes"] = json::array();
    for (const auto& sum : rep.regimes) {
        json r{{"state", sum.state},
               {"count", sum.count},
               {"spearman", sum.spearman},
               {"curves_suppressed", sum.curves_suppressed}};
        j["regimes"].push_back(std::move(r));
    }
    if (!ranks_out.empty()) write_output(ranks_out, copred::rank_pairs_csv(rep, mp.data.dates));
    if (!curves_out.empty()) write_output(curves_out, copred::dependence_curves_csv(rep));
    write_output(output, j.dump(2));
    return 0;
}

int run_bootstrap_only(const InputOptions& in, const std::string& asset_margin,
                       const std::string& market_margin, const std::string& region_name,
                       double grid_step, int s_stride, int B, int block_length, bool iid,
                       std::uint64_t seed, const std::string& bandwidth, int threads,
                       const std::string& output) {
    const auto spec1 = parse_margin(asset_margin);
    const auto spec2 = parse_margin(market_margin);
    if (region_name != "lower" && region_name != "upper")
        throw ConfigError("region '" + region_name + "' is not lower or upper");
    copred::BootstrapConfig bc;
    bc.B = B;
    bc.block_length = block_length;
    bc.iid = iid;
    bc.seed = seed;
    bc.threads = threads;
    bc.bandwidth_source = parse_bandwidth(bandwidth);

    const auto ds = load_input(in);
    const auto mp = fit_margins(ds, in.state_rule, spec1, spec2);
    const auto grid = copred::DiagonalGrid::make(region_name == "lower"
                                                     ? copred::DiagonalGrid::Region::lower
                                                     : copred::DiagonalGrid::Region::upper,
                                                 grid_step);
    const auto stats = copred::run_region_test(mp.fit1, mp.fit2, mp.data.z, grid,
                                               copred::make_s_grid(mp.data.n(), s_stride));
    const auto boot =
        copred::bootstrap_test(mp.data.y1, mp.data.y2, mp.data.z, mp.fit1, mp.fit2, stats, bc);
    json j;
    j["schema"] = "copred-bootstrap/1";
    j["region"] = region_name;
    j["n"] = mp.data.n();
    j["statistics"] = {{"delta1", stats.delta1_agg}, {"delta2", stats.delta2_agg},
                       {"t", stats.t_stat}};
    j["pvalues"] = {{"delta1", boot.p_delta1}, {"delta2", boot.p_delta2}, {"t", boot.p_t}};
    j["block_length"] = boot.block_length_used;
    j["B"] = B;
    j["failures"] = boot.failures;
    j["seed"] = seed;
    write_output(output, j.dump(2));
    return 0;
}

int run_locate_break(const InputOptions& in, const std::string& asset_margin,
                     const std::string& market_margin, const std::string& region_name,
                     double grid_step, int s_stride, const std::string& bridge_out,
                     const std::string& output) {
    const auto spec1 = parse_margin(asset_margin);
    const auto spec2 = parse_margin(market_margin);
    if (region_name != "lower" && region_name != "upper")
        throw ConfigError("region '" + region_name + "' is not lower or upper");
    const auto ds = load_input(in);
    const auto mp = fit_margins(ds, in.state_rule, spec1, spec2);
    const auto grid = copred::DiagonalGrid::make(region_name == "lower"
                                                     ? copred::DiagonalGrid::Region::lower
                                                     : copred::DiagonalGrid::Region::upper,
                                                 grid_step);
    const auto stats = copred::run_region_test(mp.fit1, mp.fit2, mp.data.z, grid,
                                               copred::make_s_grid(mp.data.n(), s_stride));
    const double s_hat = copred::locate_break(stats);
    const int n = mp.data.n();
    int k = static_cast<int>(std::floor(s_hat * n + 1e-9));
    k = std::clamp(k, 1, n - 1);
    json j;
    j["schema"] = "copred-break/1";
    j["region"] = region_name;
    j["n"] = n;
    j["s_hat"] = s_hat;
    j["break_index"] = k - 1;
    j["break_date"] = mp.data.dates[static_cast<size_t>(k - 1)];
    j["statistics"] = {{"delta1", stats.delta1_agg}, {"delta2", stats.delta2_agg},
                       {"t", stats.t_stat}};
    if (!bridge_out.empty()) {
        std::string csv = "s,bridge_sup\n";
        for (size_t i = 0; i < stats.s_grid.size(); ++i) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", stats.s_grid[i],
                          stats.bridge_sup[i]);
            csv += buf;
        }
        write_output(bridge_out, csv);
    }
    write_output(output, j.dump(2));
    return 0;
}

int run_simulate(const std::string& scenario_file, const std::vector<std::string>& presets,
                 std::vector<int> n_list, int reps, int B, double level, std::uint64_t seed,
                 double grid_step, int s_stride, int block_length, bool iid, int threads,
                 const std::string& dump_series, int dump_n, const std::string& output) {
    std::vector<copred::ScenarioSpec> scenarios;
    if (!scenario_file.empty()) {
        json j;
        try {
            j = json::parse(read_file(scenario_file));
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("scenario file: ") + e.what());
        }
        if (!j.is_array()) j = json::array({j});
        for (const auto& item : j) {
            try {
                scenarios.push_back(copred::scenario_from_json(item.dump()));
            } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string("scenario file: ") + e.what());
            }
        }
    }
    for (const auto& name : presets) {
        try {
            scenarios.push_back(copred::scenario_preset(name, n_list.empty() ? 1000 : n_list[0]));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    if (scenarios.empty()) throw ConfigError("no scenarios given (use --scenarios or --preset)");

    if (!dump_series.empty()) {
        if (scenarios.size() != 1)
            throw ConfigError("--dump-series needs exactly one scenario");
        auto spec = scenarios.front();
        if (dump_n > 0) spec.n = dump_n;
        try {
            spec.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        copred::Rng rng = copred::Rng::stream(seed, {0});
        const auto draw = copred::simulate_scenario(spec, rng);
        std::string csv = "t,y1,y2,z,u1,u2\n";
        for (int t = 0; t < spec.n; ++t) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", t,
                          draw.y1[static_cast<size_t>(t)], draw.y2[static_cast<size_t>(t)],
                          draw.z[static_cast<size_t>(t)], draw.u1[static_cast<size_t>(t)],
                          draw.u2[static_cast<size_t>(t)]);
            csv += buf;
        }
        write_output(dump_series, csv);
        return 0;
    }

    if (n_list.empty()) n_list = {scenarios.front().n};
    copred::McConfig cfg;
    cfg.bootstrap.B = B;
    cfg.bootstrap.block_length = block_length;
    cfg.bootstrap.iid = iid;
    cfg.level = level;
    cfg.threads = threads;
    cfg.seed = seed;
    cfg.grid_step = grid_step;
    cfg.s_stride = s_stride;
    copred::McTable table;
    try {
        table = copred::run_mc_experiment(scenarios, n_list, reps, cfg);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    std::ostringstream csv;
    copred::write_mc_csv(table, csv);
    write_output(output, csv.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dependence predictability testing for bivariate return series"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "worker cap for all parallel stages (0 = hardware)");

    TestOptions topt;
    auto* test_cmd = app.add_subcommand("test", "run the full test pipeline on a CSV sample");
    add_input_flags(test_cmd, topt.in);
    test_cmd->add_option("--asset-margin", topt.asset_margin,
                         "asset margin terms, comma list of ar,exog,gjr or none");
    test_cmd->add_option("--market-margin", topt.market_margin, "market margin terms");
    test_cmd->add_option("--regions", topt.regions, "diagonal regions to test")
        ->delimiter(',');
    test_cmd->add_option("--alpha", topt.alpha, "overall level of the sequential scheme");
    test_cmd->add_option("--grid-step", topt.grid_step, "diagonal grid step");
    test_cmd->add_option("--s-stride", topt.s_stride, "prefix grid stride");
    test_cmd->add_option("--min-length", topt.min_length, "shortest span that is still tested");
    test_cmd->add_option("--B", topt.B, "bootstrap replicates");
    test_cmd->add_option("--block-length", topt.block_length, "MBB block length (0 = automatic)");
    test_cmd->add_flag("--iid", topt.iid, "degenerate blocks of length one");
    test_cmd->add_option("--seed", topt.seed, "bootstrap seed");
    test_cmd->add_option("--bandwidth-source", topt.bandwidth_source,
                         "series driving the automatic block length");
    test_cmd->add_flag("--timings", topt.timings, "include wall-clock timings in the report");
    test_cmd->add_option("--indent", topt.indent, "JSON indent (-1 = compact)");
    test_cmd->add_option("--output", topt.output, "report path ('-' = stdout)");
    test_cmd->add_option("--config", topt.config_path,
                         "JSON config whose keys override the flags");

    InputOptions dopt;
    std::string d_asset_margin = "ar,exog,gjr", d_market_margin = "ar,gjr";
    double d_q_step = 0.01;
    int d_min_regime = 50;
    std::string d_ranks_out, d_curves_out, d_output = "-";
    auto* describe_cmd =
        app.add_subcommand("describe", "regime descriptives of the filtered dependence");
    add_input_flags(describe_cmd, dopt);
    describe_cmd->add_option("--asset-margin", d_asset_margin, "asset margin terms");
    describe_cmd->add_option("--market-margin", d_market_margin, "market margin terms");
    describe_cmd->add_option("--q-step", d_q_step, "quantile grid step");
    describe_cmd->add_option("--min-regime", d_min_regime,
                             "smallest regime that still gets tail curves");
    describe_cmd->add_option("--ranks-out", d_ranks_out, "rank-pair CSV path");
    describe_cmd->add_option("--curves-out", d_curves_out, "dependence-curve CSV path");
    describe_cmd->add_option("--output", d_output, "summary JSON path ('-' = stdout)");

    InputOptions bopt;
    std::string b_asset_margin = "ar,exog,gjr", b_market_margin = "ar,gjr";
    std::string b_region = "lower", b_bandwidth = "state", b_output = "-";
    double b_grid_step = 0.05;
    int b_s_stride = 1, b_B = 499, b_block_length = 0;
    bool b_iid = false;
    std::uint64_t b_seed = 7121;
    auto* boot_cmd = app.add_subcommand(
        "bootstrap-only", "full-span statistics and bootstrap p-values, no break dating");
    add_input_flags(boot_cmd, bopt);
    boot_cmd->add_option("--asset-margin", b_asset_margin, "asset margin terms");
    boot_cmd->add_option("--market-margin", b_market_margin, "market margin terms");
    boot_cmd->add_option("--region", b_region, "diagonal region");
    boot_cmd->add_option("--grid-step", b_grid_step, "diagonal grid step");
    boot_cmd->add_option("--s-stride", b_s_stride, "prefix grid stride");
    boot_cmd->add_option("--B", b_B, "bootstrap replicates");
    boot_cmd->add_option("--block-length", b_block_length, "MBB block length (0 = automatic)");
    boot_cmd->add_flag("--iid", b_iid, "degenerate blocks of length one");
    boot_cmd->add_option("--seed", b_seed, "bootstrap seed");
    boot_cmd->add_option("--bandwidth-source", b_bandwidth,
                         "series driving the automatic block length");
    boot_cmd->add_option("--output", b_output, "JSON path ('-' = stdout)");

    InputOptions lopt;
    std::string l_asset_margin = "ar,exog,gjr", l_market_margin = "ar,gjr";
    std::string l_region = "lower", l_bridge_out, l_output = "-";
    double l_grid_step = 0.05;
    int l_s_stride = 1;
    auto* locate_cmd =
        app.add_subcommand("locate-break", "date the strongest break, no calibration");
    add_input_flags(locate_cmd, lopt);
    locate_cmd->add_option("--asset-margin", l_asset_margin, "asset margin terms");
    locate_cmd->add_option("--market-margin", l_market_margin, "market margin terms");
    locate_cmd->add_option("--region", l_region, "diagonal region");
    locate_cmd->add_option("--grid-step", l_grid_step, "diagonal grid step");
    locate_cmd->add_option("--s-stride", l_s_stride, "prefix grid stride");
    locate_cmd->add_option("--bridge-out", l_bridge_out, "bridge path CSV");
    locate_cmd->add_option("--output", l_output, "JSON path ('-' = stdout)");

    std::string s_scenarios, s_dump_series, s_output = "-";
    std::vector<std::string> s_presets;
    std::vector<int> s_n_list;
    int s_reps = 499, s_B = 499, s_s_stride = 1, s_block_length = 0, s_dump_n = 0;
    double s_level = 0.05, s_grid_step = 0.05;
    bool s_iid = false;
    std::uint64_t s_seed = 20260819;
    auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo rejection tables");
    sim_cmd->add_option("--scenarios", s_scenarios, "scenario JSON file (one object or an array)");
    sim_cmd->add_option("--preset", s_presets,
                        "named scenarios: gauss, frank, patch, constant, mid-break, offset")
        ->delimiter(',');
    sim_cmd->add_option("--n-list", s_n_list, "sample sizes")->delimiter(',');
    sim_cmd->add_option("--reps", s_reps, "Monte Carlo replications per cell");
    sim_cmd->add_option("--B", s_B, "bootstrap replicates inside each rep");
    sim_cmd->add_option("--level", s_level, "nominal rejection level");
    sim_cmd->add_option("--seed", s_seed, "root seed");
    sim_cmd->add_option("--grid-step", s_grid_step, "diagonal grid step");
    sim_cmd->add_option("--s-stride", s_s_stride, "prefix grid stride");
    sim_cmd->add_option("--block-length", s_block_length, "MBB block length (0 = automatic)");
    sim_cmd->add_flag("--iid", s_iid, "degenerate blocks of length one");
    sim_cmd->add_option("--dump-series", s_dump_series,
                        "write one simulated draw as CSV instead of running the table");
    sim_cmd->add_option("--n", s_dump_n, "sample size for --dump-series");
    sim_cmd->add_option("--output", s_output, "table path ('-' = stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // help or version
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        if (*test_cmd) return run_test(topt, threads);
        if (*describe_cmd)
            return run_describe(dopt, d_asset_margin, d_market_margin, d_q_step, d_min_regime,
                                d_ranks_out, d_curves_out, d_output);
        if (*boot_cmd)
            return run_bootstrap_only(bopt, b_asset_margin, b_market_margin, b_region,
                                      b_grid_step, b_s_stride, b_B, b_block_length, b_iid,
                                      b_seed, b_bandwidth, threads, b_output);
        if (*locate_cmd)
            return run_locate_break(lopt, l_asset_margin, l_market_margin, l_region,
                                    l_grid_step, l_s_stride, l_bridge_out, l_output);
        if (*sim_cmd)
            return run_simulate(s_scenarios, s_presets, s_n_list, s_reps, s_B, s_level, s_seed,
                                s_grid_step, s_s_stride, s_block_length, s_iid, threads,
                                s_dump_series, s_dump_n, s_output);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const copred::ConvergenceError& e) {
        std::cerr << "error: marginal fit failed: " << e.what() << '\n';
        return kExitConvergence;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConvergence;
    }
    return 0;
}
