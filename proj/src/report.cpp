#include "copred/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "copred/breaks.hpp"
#include "copred/score.hpp"
#include "shortest.hpp"

namespace copred {

namespace {

using nlohmann::json;

// ECDF value of each entry among the whole sample, counting ties as <=.
std::vector<double> full_sample_ranks(const std::vector<double>& e) {
    std::vector<double> sorted = e;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> u(e.size());
    const double n = static_cast<double>(e.size());
    for (size_t t = 0; t < e.size(); ++t) {
        auto it = std::upper_bound(sorted.begin(), sorted.end(), e[t]);
        u[t] = static_cast<double>(it - sorted.begin()) / n;
    }
    return u;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const size_t n = x.size();
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    double mx = 0.0, my = 0.0;
    for (size_t t = 0; t < n; ++t) {
        mx += x[t];
        my += y[t];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (size_t t = 0; t < n; ++t) {
        const double dx = x[t] - mx, dy = y[t] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    return sxy / std::sqrt(sxx * syy);
}

json spec_to_json(const MarginalModelSpec& spec) {
    return json{{"ar", spec.ar}, {"exog", spec.exog}, {"gjr", spec.gjr}};
}

const char* bandwidth_name(BootstrapConfig::Bandwidth b) {
    switch (b) {
        case BootstrapConfig::Bandwidth::state: return "state";
        case BootstrapConfig::Bandwidth::margin1: return "margin1";
        default: return "margin2";
    }
}

json fit_to_json(const MarginalFit& fit, const char* series) {
    json p{{"mu", fit.params.mu},       {"phi", fit.params.phi},
           {"gamma", fit.params.gamma}, {"omega", fit.params.omega},
           {"arch", fit.params.arch},   {"gjr", fit.params.gjr},
           {"garch", fit.params.garch}};
    return json{{"series", series},
                {"params", std::move(p)},
                {"std_errors", fit.std_errors},
                {"loglik", fit.loglik},
                {"converged", fit.converged},
                {"iterations", fit.iterations}};
}

json node_to_json(const SplitNode& node) {
    json out;
    out["span"] = {{"start", node.start},
                   {"length", node.length},
                   {"s_lo", node.s_lo},
                   {"s_hi", node.s_hi}};
    out["dates"] = {{"from", node.date_lo}, {"to", node.date_hi}};
    out["level"] = node.level_used;
    out["too_short"] = node.too_short;
    if (node.t_pvalue) {
        out["statistics"] = {{"delta1", node.delta1_agg},
                             {"delta2", node.delta2_agg},
                             {"t", node.t_stat}};
        out["pvalues"] = {{"delta1", *node.delta1_pvalue},
                          {"delta2", *node.delta2_pvalue},
                          {"t", *node.t_pvalue}};
        out["block_length"] = node.block_length_used;
    } else {
        out["statistics"] = nullptr;
        out["pvalues"] = nullptr;
        out["block_length"] = nullptr;
    }
    if (node.cusum_pvalue)
        out["cusum"] = {{"level", node.cusum_level}, {"pvalue", *node.cusum_pvalue}};
    else
        out["cusum"] = nullptr;
    if (node.break_s)
        out["break"] = {{"s", *node.break_s},
                        {"index", *node.break_index},
                        {"date", node.break_date.empty() ? json() : json(node.break_date)}};
    else
        out["break"] = nullptr;
    out["children"] = json::array();
    for (const auto& child : node.children) out["children"].push_back(node_to_json(child));
    return out;
}

json optional_pvalue(const std::optional<double>& p) {
    return p ? json(*p) : json();
}

json region_summary(const SplitNode& tree) {
    json out;
    out["full_span_pvalue"] = optional_pvalue(tree.t_pvalue);
    out["cusum_pvalue"] = optional_pvalue(tree.cusum_pvalue);
    out["break_date"] =
        tree.break_s && !tree.break_date.empty() ? json(tree.break_date) : json();
    json left, right;
    if (tree.children.size() == 2) {
        left = optional_pvalue(tree.children[0].t_pvalue);
        right = optional_pvalue(tree.children[1].t_pvalue);
    }
    out["left_pvalue"] = left;
    out["right_pvalue"] = right;
    return out;
}

}  // namespace

DescriptiveReport descriptive_report(const MarginalFit& fit1, const MarginalFit& fit2,
                                     const std::vector<double>& z, double q_step,
                                     int min_regime) {
    const size_t n = fit1.residuals.size();
    if (n == 0 || fit2.residuals.size() != n || z.size() != n)
        throw std::invalid_argument("residual and state lengths disagree");
    if (!(q_step > 0.0 && q_step < 0.5))
        throw std::invalid_argument("q_step outside (0, 0.5)");
    const double cells = 0.5 / q_step;
    const int half = static_cast<int>(std::lround(cells));
    if (std::abs(cells - half) > 1e-9)
        throw std::invalid_argument("q_step must divide 0.5 evenly");
    for (double v : z)
        if (v != 0.0 && v != 1.0)
            throw std::invalid_argument("descriptive regimes need a binary state");

    DescriptiveReport rep;
    rep.u1 = full_sample_ranks(fit1.residuals);
    rep.u2 = full_sample_ranks(fit2.residuals);
    rep.regime.resize(n);
    for (size_t t = 0; t < n; ++t) rep.regime[t] = z[t] == 1.0 ? 1 : 0;

    for (int r = 0; r < 2; ++r) {
        RegimeSummary sum;
        sum.state = static_cast<double>(r);
        std::vector<double> v1, v2;
        for (size_t t = 0; t < n; ++t) {
            if (rep.regime[t] != r) continue;
            v1.push_back(rep.u1[t]);
            v2.push_back(rep.u2[t]);
        }
        sum.count = static_cast<int>(v1.size());
        sum.spearman = pearson(v1, v2);
        sum.curves_suppressed = sum.count < min_regime;
        if (!sum.curves_suppressed) {
            auto diag_cdf = [&](double q) {
                int hits = 0;
                for (size_t i = 0; i < v1.size(); ++i)
                    if (v1[i] <= q && v2[i] <= q) ++hits;
                return static_cast<double>(hits) / static_cast<double>(v1.size());
            };
            for (int i = 1; i <= half; ++i) {
                const double q = q_step * i;
                sum.q_lower.push_back(q);
                sum.lower.push_back(diag_cdf(q) / q);
            }
            for (int i = half; i < 2 * half; ++i) {
                const double q = q_step * i;
                sum.q_upper.push_back(q);
                sum.upper.push_back((1.0 - 2.0 * q + diag_cdf(q)) / (1.0 - q));
            }
        }
        rep.regimes.push_back(std::move(sum));
    }
    return rep;
}

std::string rank_pairs_csv(const DescriptiveReport& rep, const std::vector<std::string>& dates) {
    if (dates.size() != rep.u1.size())
        throw std::invalid_argument("date labels differ in length");
    std::string out = "date,u1,u2,regime\n";
    for (size_t t = 0; t < rep.u1.size(); ++t) {
        out += dates[t];
        out += ',';
        out += detail::shortest(rep.u1[t]);
        out += ',';
        out += detail::shortest(rep.u2[t]);
        out += ',';
        out += rep.regime[t] ? '1' : '0';
        out += '\n';
    }
    return out;
}

std::string dependence_curves_csv(const DescriptiveReport& rep) {
    std::string out = "regime,tail,q,value\n";
    for (const auto& sum : rep.regimes) {
        const char regime = sum.state == 1.0 ? '1' : '0';
        for (size_t i = 0; i < sum.q_lower.size(); ++i) {
            out += regime;
            out += ",lower,";
            out += detail::shortest(sum.q_lower[i]);
            out += ',';
            out += detail::shortest(sum.lower[i]);
            out += '\n';
        }
        for (size_t i = 0; i < sum.q_upper.size(); ++i) {
            out += regime;
            out += ",upper,";
            out += detail::shortest(sum.q_upper[i]);
            out += ',';
            out += detail::shortest(sum.upper[i]);
            out += '\n';
        }
    }
    return out;
}

std::string run_full_analysis(const DataSet& ds, const AnalysisConfig& cfg) {
    const size_t n0 = ds.dates.size();
    if (ds.y1.size() != n0 || ds.y2.size() != n0 || (!ds.z.empty() && ds.z.size() != n0))
        throw std::invalid_argument("dataset fields differ in length");
    if (cfg.regions.empty()) throw std::invalid_argument("no regions requested");
    for (const auto& name : cfg.regions)
        if (name != "lower" && name != "upper")
            throw std::invalid_argument("unknown region '" + name + "'");
    if (cfg.regions.size() > 2 ||
        (cfg.regions.size() == 2 && cfg.regions[0] == cfg.regions[1]))
        throw std::invalid_argument("regions repeat");

    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    auto ms_since = [](clock::time_point from) {
        return std::chrono::duration<double, std::milli>(clock::now() - from).count();
    };

    const DataSet data = derive_state(ds, cfg.state_rule);

    json j;
    j["schema"] = "copred-report/1";
    j["input"] = {{"n", data.n()},
                  {"first_date", data.dates.front()},
                  {"last_date", data.dates.back()},
                  {"state_rule", cfg.state_rule}};
    j["config"] = {
        {"alpha", cfg.alpha},
        {"levels",
         {{"full_span", cfg.alpha},
          {"cusum", 1.0 - std::sqrt(1.0 - cfg.alpha)},
          {"children", 1.0 - std::pow(1.0 - cfg.alpha, 0.25)}}},
        {"grid_step", cfg.grid_step},
        {"s_stride", cfg.s_stride},
        {"min_length", cfg.min_length},
        {"regions", cfg.regions},
        {"margins", {{"asset", spec_to_json(cfg.asset_spec)}, {"market", spec_to_json(cfg.market_spec)}}},
        {"bootstrap",
         {{"B", cfg.bootstrap.B},
          {"block_length", cfg.bootstrap.block_length},
          {"iid", cfg.bootstrap.iid},
          {"seed", cfg.bootstrap.seed},
          {"threads", cfg.bootstrap.threads},
          {"max_redraws", cfg.bootstrap.max_redraws},
          {"bandwidth_source", bandwidth_name(cfg.bootstrap.bandwidth_source)}}},
        {"state_rule", cfg.state_rule},
        {"timings", cfg.timings}};
    j["seeds"] = {{"bootstrap", cfg.bootstrap.seed},
                  {"left_child", split_child_seed(cfg.bootstrap.seed, 0)},
                  {"right_child", split_child_seed(cfg.bootstrap.seed, 1)}};

    if (state_is_degenerate(data.z)) {
        j["degenerate_state"] = true;
        j["warning"] =
            "state is constant over the sample; the dependence predictability test is skipped";
        return j.dump(cfg.json_indent);
    }
    j["degenerate_state"] = false;

    const auto t_fit = clock::now();
    const std::vector<double> empty;
    const MarginalFit fit1 =
        fit_marginal(data.y1, cfg.asset_spec.exog ? data.z : empty, cfg.asset_spec);
    const MarginalFit fit2 =
        fit_marginal(data.y2, cfg.market_spec.exog ? data.z : empty, cfg.market_spec);
    j["margins"] = json::array({fit_to_json(fit1, "asset"), fit_to_json(fit2, "market")});
    const double fit_ms = ms_since(t_fit);

    SplitConfig sc;
    sc.spec1 = cfg.asset_spec;
    sc.spec2 = cfg.market_spec;
    sc.bootstrap = cfg.bootstrap;
    sc.min_length = cfg.min_length;
    sc.s_stride = cfg.s_stride;

    json regions_ms;
    j["regions"] = json::object();
    for (const auto& name : cfg.regions) {
        const auto region = name == "lower" ? DiagonalGrid::Region::lower
                                            : DiagonalGrid::Region::upper;
        const auto grid = DiagonalGrid::make(region, cfg.grid_step);
        const auto t_region = clock::now();
        const SplitNode tree =
            sequential_split(data.y1, data.y2, data.z, grid, sc, cfg.alpha, &data.dates);
        regions_ms[name] = ms_since(t_region);
        j["regions"][name] = {{"summary", region_summary(tree)}, {"tree", node_to_json(tree)}};
    }

    if (cfg.timings)
        j["timings"] = {{"enabled", true},
                        {"fit_ms", fit_ms},
                        {"regions_ms", regions_ms},
                        {"total_ms", ms_since(t0)}};
    else
        j["timings"] = {{"enabled", false}};
    return j.dump(cfg.json_indent);
}

}  // namespace copred
