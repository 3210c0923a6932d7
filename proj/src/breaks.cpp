#include "copred/breaks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "copred/ranks.hpp"

namespace copred {

double locate_break(const RegionStatistics& stats) {
    if (stats.bridge_sup.empty() || stats.s_grid.size() != stats.bridge_sup.size())
        throw std::invalid_argument("statistics carry no bridge path");
    const auto it = std::max_element(stats.bridge_sup.begin(), stats.bridge_sup.end());
    if (*it <= 0.0) throw std::runtime_error("bridge is flat, no break to date");
    return stats.s_grid[(size_t)(it - stats.bridge_sup.begin())];
}

std::uint64_t split_child_seed(std::uint64_t seed, int side) {
    std::uint64_t sm = seed ^ (0x5851f42d4c957f2dULL * (std::uint64_t)(side + 1));
    return splitmix64(sm);
}

namespace {

std::vector<double> slice(const std::vector<double>& x, int start, int len) {
    return std::vector<double>(x.begin() + start, x.begin() + start + len);
}

struct SpanOutcome {
    MarginalFit fit1, fit2;
    RegionStatistics stats;
    BootstrapResult boot;
};

SpanOutcome evaluate_span(const std::vector<double>& y1, const std::vector<double>& y2,
                          const std::vector<double>& z, const DiagonalGrid& grid,
                          const SplitConfig& cfg, std::uint64_t seed) {
    SpanOutcome out;
    const std::vector<double> empty;
    out.fit1 = fit_marginal(y1, cfg.spec1.exog ? z : empty, cfg.spec1);
    out.fit2 = fit_marginal(y2, cfg.spec2.exog ? z : empty, cfg.spec2);
    RankPanel panel(out.fit1.residuals, out.fit2.residuals);
    out.stats = run_region_test(panel, z, grid, make_s_grid((int)y1.size(), cfg.s_stride));
    BootstrapConfig bc = cfg.bootstrap;
    bc.seed = seed;
    out.boot = bootstrap_test(y1, y2, z, out.fit1, out.fit2, out.stats, bc);
    return out;
}

void label_span(SplitNode& node, const std::vector<std::string>* dates) {
    if (!dates) return;
    node.date_lo = (*dates)[(size_t)node.start];
    node.date_hi = (*dates)[(size_t)(node.start + node.length - 1)];
}

}  // namespace

SplitNode sequential_split(const std::vector<double>& y1, const std::vector<double>& y2,
                           const std::vector<double>& z, const DiagonalGrid& grid,
                           const SplitConfig& cfg, double alpha,
                           const std::vector<std::string>* dates) {
    const int n = (int)y1.size();
    if ((int)y2.size() != n || (int)z.size() != n)
        throw std::invalid_argument("split inputs differ in length");
    if (dates && (int)dates->size() != n)
        throw std::invalid_argument("date labels differ in length");
    if (!(alpha > 0.0 && alpha < 0.5)) throw std::invalid_argument("level outside (0, 0.5)");

    const double cusum_level = 1.0 - std::sqrt(1.0 - alpha);
    const double child_level = 1.0 - std::pow(1.0 - alpha, 0.25);

    SplitNode root;
    root.start = 0;
    root.length = n;
    root.s_lo = 0.0;
    root.s_hi = 1.0;
    root.level_used = alpha;
    label_span(root, dates);
    if (n < cfg.min_length) {
        root.too_short = true;
        return root;
    }

    const auto full = evaluate_span(y1, y2, z, grid, cfg, cfg.bootstrap.seed);
    root.t_pvalue = full.boot.p_t;
    root.delta1_pvalue = full.boot.p_delta1;
    root.delta2_pvalue = full.boot.p_delta2;
    root.delta1_agg = full.stats.delta1_agg;
    root.delta2_agg = full.stats.delta2_agg;
    root.t_stat = full.stats.t_stat;
    root.block_length_used = full.boot.block_length_used;
    if (*root.t_pvalue > alpha) return root;

    root.cusum_pvalue = full.boot.p_delta1;
    root.cusum_level = cusum_level;
    if (*root.cusum_pvalue > cusum_level) return root;

    const double s_hat = locate_break(full.stats);
    int k = (int)std::floor(s_hat * n + 1e-9);
    k = std::clamp(k, 1, n - 1);
    root.break_index = k - 1;
    root.break_s = (double)k / n;
    if (dates) root.break_date = (*dates)[(size_t)(k - 1)];

    const int starts[2] = {0, k};
    const int lengths[2] = {k, n - k};
    for (int side = 0; side < 2; ++side) {
        SplitNode child;
        child.start = starts[side];
        child.length = lengths[side];
        child.s_lo = (double)child.start / n;
        child.s_hi = (double)(child.start + child.length) / n;
        child.level_used = child_level;
        label_span(child, dates);
        if (child.length < cfg.min_length) {
            child.too_short = true;
        } else {
            const auto part = evaluate_span(
                slice(y1, child.start, child.length), slice(y2, child.start, child.length),
                slice(z, child.start, child.length), grid, cfg,
                split_child_seed(cfg.bootstrap.seed, side));
            child.t_pvalue = part.boot.p_t;
            child.delta1_pvalue = part.boot.p_delta1;
            child.delta2_pvalue = part.boot.p_delta2;
            child.delta1_agg = part.stats.delta1_agg;
            child.delta2_agg = part.stats.delta2_agg;
            child.t_stat = part.stats.t_stat;
            child.block_length_used = part.boot.block_length_used;
        }
        root.children.push_back(std::move(child));
    }
    return root;
}

}  // namespace copred
