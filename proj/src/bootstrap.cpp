#include "copred/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "copred/parallel.hpp"
#include "copred/ranks.hpp"

namespace copred {

int block_length_from_rho(double rho, int n, bool* clamped) {
    if (n < 20) throw std::invalid_argument("block length rule needs n >= 20");
    const double limit = 1.0 - 1e-6;
    bool hit = false;
    if (std::abs(rho) >= limit) {
        rho = std::copysign(limit, rho);
        hit = true;
    }
    if (clamped) *clamped = hit;
    const double one_minus = (1.0 - rho) * (1.0 - rho);
    const double one_plus = (1.0 + rho) * (1.0 + rho);
    const double a1 = 4.0 * rho * rho / (one_minus * one_plus);
    const double bandwidth = 1.1447 * std::cbrt(a1 * n);
    const int cap = (int)std::floor(std::sqrt((double)n));
    return std::clamp((int)std::ceil(bandwidth), 1, cap);
}

int andrews_block_length(const std::vector<double>& z, bool* clamped) {
    return block_length_from_rho(ar1_coefficient(z), (int)z.size(), clamped);
}

std::vector<int> mbb_indices(int n, int l, Rng& rng) {
    if (n < 1 || l < 1 || l > n) throw std::invalid_argument("bad block configuration");
    std::vector<int> idx;
    idx.reserve(n);
    const int starts = n - l + 1;
    while ((int)idx.size() < n) {
        const int start = (int)rng.below((std::uint64_t)starts);
        for (int j = 0; j < l && (int)idx.size() < n; ++j) idx.push_back(start + j);
    }
    return idx;
}

namespace {

std::vector<double> take_rows(const std::vector<double>& x, const std::vector<int>& idx) {
    std::vector<double> out(idx.size());
    for (size_t i = 0; i < idx.size(); ++i) out[i] = x[(size_t)idx[i]];
    return out;
}

bool is_identity(const std::vector<int>& idx) {
    for (size_t i = 0; i < idx.size(); ++i)
        if (idx[i] != (int)i) return false;
    return true;
}

double tail_p(const std::vector<double>& draws, double observed) {
    int count = 0;
    for (double d : draws) count += (d >= observed);
    return (1.0 + count) / (draws.size() + 1.0);
}

}  // namespace

std::vector<BootstrapResult> bootstrap_test_set(
    const std::vector<double>& y1, const std::vector<double>& y2,
    const std::vector<double>& z, const MarginalFit& fit1, const MarginalFit& fit2,
    std::span<const RegionStatistics> originals, const BootstrapConfig& cfg) {
    const int n = (int)y1.size();
    if ((int)y2.size() != n || (int)z.size() != n)
        throw std::invalid_argument("bootstrap inputs differ in length");
    if (cfg.B < 1) throw std::invalid_argument("replicate count must be positive");
    if (originals.empty()) throw std::invalid_argument("no region statistics given");
    for (const auto& original : originals) {
        if (original.points.empty() || original.s_grid.empty() || original.s_grid.back() != 1.0)
            throw std::invalid_argument("original statistics incomplete");
        if (original.s_grid != originals.front().s_grid)
            throw std::invalid_argument("regions disagree on the prefix grid");
    }
    const auto& s_grid = originals.front().s_grid;

    int l;
    if (cfg.iid) {
        l = 1;
    } else if (cfg.block_length > 0) {
        if (cfg.block_length > n)
            throw std::invalid_argument("block length exceeds the sample");
        l = cfg.block_length;
    } else {
        switch (cfg.bandwidth_source) {
            case BootstrapConfig::Bandwidth::margin1: l = andrews_block_length(fit1.residuals); break;
            case BootstrapConfig::Bandwidth::margin2: l = andrews_block_length(fit2.residuals); break;
            default: l = andrews_block_length(z); break;
        }
        l = std::min(l, n);
    }

    const size_t regions = originals.size();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::vector<double>> slot_t(regions), slot_d1(regions), slot_d2(regions);
    for (size_t r = 0; r < regions; ++r) {
        slot_t[r].assign(cfg.B, nan);
        slot_d1[r].assign(cfg.B, nan);
        slot_d2[r].assign(cfg.B, nan);
    }

    parallel_for(cfg.B, cfg.threads, [&](int b) {
        for (int attempt = 0; attempt < cfg.max_redraws; ++attempt) {
            Rng rng = Rng::stream(cfg.seed, {(std::uint64_t)b, (std::uint64_t)attempt});
            const auto idx = mbb_indices(n, l, rng);

            if (is_identity(idx)) {
                // the resample is the original sample; reuse its pipeline
                // output so the centered endpoint vanishes exactly
                for (size_t r = 0; r < regions; ++r) {
                    const auto& original = originals[r];
                    const size_t g = original.points.size();
                    std::vector<double> d2(g, 0.0), both(g);
                    for (size_t i = 0; i < g; ++i) both[i] = original.delta1[i];
                    slot_t[r][b] = aggregate_omega(original.grid, both);
                    slot_d1[r][b] = slot_t[r][b];
                    slot_d2[r][b] = aggregate_omega(original.grid, d2);
                }
                return;
            }

            const auto y1b = take_rows(y1, idx);
            const auto y2b = take_rows(y2, idx);
            const auto zb = take_rows(z, idx);
            MarginalFit fb1, fb2;
            try {
                FitOptions fo;
                fo.restarts = 1;
                fo.warm_start = &fit1.params;
                fo.seed = rng.next();
                fb1 = fit_marginal(y1b, fit1.spec.exog ? zb : std::vector<double>{},
                                   fit1.spec, fo);
                fo.warm_start = &fit2.params;
                fo.seed = rng.next();
                fb2 = fit_marginal(y2b, fit2.spec.exog ? zb : std::vector<double>{},
                                   fit2.spec, fo);
            } catch (const ConvergenceError&) {
                continue;
            } catch (const std::invalid_argument&) {
                continue;
            }
            RankPanel panel(fb1.residuals, fb2.residuals);
            for (size_t r = 0; r < regions; ++r) {
                const auto& original = originals[r];
                const size_t g = original.points.size();
                const auto stats = run_region_test(panel, zb, original.grid, s_grid);
                std::vector<double> d1(g), d2(g), both(g);
                for (size_t i = 0; i < g; ++i) {
                    d1[i] = stats.delta1[i];
                    double centered = 0.0;
                    const auto& end_b = stats.points[i].score_end;
                    const auto& end_0 = original.points[i].score_end;
                    for (size_t d = 0; d < end_b.size(); ++d)
                        centered = std::max(centered, std::abs(end_b[d] - end_0[d]));
                    d2[i] = centered;
                    both[i] = d1[i] + d2[i];
                }
                slot_t[r][b] = aggregate_omega(original.grid, both);
                slot_d1[r][b] = aggregate_omega(original.grid, d1);
                slot_d2[r][b] = aggregate_omega(original.grid, d2);
            }
            return;
        }
    });

    std::vector<BootstrapResult> results(regions);
    for (size_t r = 0; r < regions; ++r) {
        auto& result = results[r];
        result.block_length_used = l;
        for (int b = 0; b < cfg.B; ++b) {
            if (std::isnan(slot_t[r][b])) {
                ++result.failures;
                continue;
            }
            result.t_draws.push_back(slot_t[r][b]);
            result.delta1_draws.push_back(slot_d1[r][b]);
            result.delta2_draws.push_back(slot_d2[r][b]);
        }
        if (result.failures > 0.05 * cfg.B)
            throw std::runtime_error("bootstrap: more than 5% of replicates failed to refit");

        result.p_t = tail_p(result.t_draws, originals[r].t_stat);
        result.p_delta1 = tail_p(result.delta1_draws, originals[r].delta1_agg);
        result.p_delta2 = tail_p(result.delta2_draws, originals[r].delta2_agg);
    }
    return results;
}

BootstrapResult bootstrap_test(const std::vector<double>& y1, const std::vector<double>& y2,
                               const std::vector<double>& z, const MarginalFit& fit1,
                               const MarginalFit& fit2, const RegionStatistics& original,
                               const BootstrapConfig& cfg) {
    auto results = bootstrap_test_set(y1, y2, z, fit1, fit2, {&original, 1}, cfg);
    return std::move(results.front());
}

}  // namespace copred
