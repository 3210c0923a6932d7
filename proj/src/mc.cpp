#include "copred/mc.hpp"

#include <array>
#include <ostream>
#include <stdexcept>

#include "copred/parallel.hpp"
#include "copred/ranks.hpp"
#include "copred/score.hpp"
#include "shortest.hpp"

namespace copred {

namespace {

constexpr std::array<const char*, 2> kRegions{"lower", "upper"};
constexpr std::array<const char*, 3> kStatistics{"delta1", "delta2", "t"};

struct RepOutcome {
    bool ok = false;
    std::array<bool, 6> reject{};  // region-major: (lower|upper) x (d1,d2,t)
};

}  // namespace

const McRow& McTable::at(const std::string& region, const std::string& statistic,
                         const std::string& scenario, int n) const {
    for (const auto& row : rows) {
        if (row.region == region && row.statistic == statistic &&
            row.scenario == scenario && row.n == n)
            return row;
    }
    throw std::out_of_range("no table cell " + region + "/" + statistic + "/" + scenario +
                            "/n=" + std::to_string(n));
}

McTable run_mc_experiment(const std::vector<ScenarioSpec>& scenarios,
                          const std::vector<int>& n_list, int reps, const McConfig& cfg) {
    if (reps < 100) throw std::invalid_argument("need at least 100 replicates");
    if (scenarios.empty()) throw std::invalid_argument("no scenarios given");
    if (n_list.empty()) throw std::invalid_argument("no sample lengths given");
    for (int n : n_list)
        if (n < 100) throw std::invalid_argument("sample lengths must be at least 100");
    if (!(cfg.level > 0.0 && cfg.level < 1.0))
        throw std::invalid_argument("level must lie in (0,1)");

    const MarginalModelSpec margin_spec{.ar = true, .exog = true, .gjr = false};
    McTable table;

    for (size_t si = 0; si < scenarios.size(); ++si) {
        const std::string label = scenario_label(scenarios[si]);
        for (size_t ni = 0; ni < n_list.size(); ++ni) {
            const int n = n_list[ni];
            ScenarioSpec spec = scenarios[si];
            spec.n = n;
            spec.validate();

            const auto s_grid = make_s_grid(n, cfg.s_stride);
            const auto lower = DiagonalGrid::make(DiagonalGrid::Region::lower, cfg.grid_step);
            const auto upper = DiagonalGrid::make(DiagonalGrid::Region::upper, cfg.grid_step);

            std::vector<RepOutcome> slots(reps);
            parallel_for(reps, cfg.threads, [&](int rep) {
                Rng rng = Rng::stream(cfg.seed, {si, ni, (std::uint64_t)rep});
                try {
                    const auto draw = simulate_scenario(spec, rng);
                    FitOptions fo;
                    fo.seed = rng.next();
                    const auto fit1 = fit_marginal(draw.y1, draw.z, margin_spec, fo);
                    fo.seed = rng.next();
                    const auto fit2 = fit_marginal(draw.y2, draw.z, margin_spec, fo);
                    const RankPanel panel(fit1.residuals, fit2.residuals);
                    const std::array<RegionStatistics, 2> stats{
                        run_region_test(panel, draw.z, lower, s_grid),
                        run_region_test(panel, draw.z, upper, s_grid)};
                    BootstrapConfig bc = cfg.bootstrap;
                    bc.threads = 1;
                    bc.seed = rng.next();
                    const auto results =
                        bootstrap_test_set(draw.y1, draw.y2, draw.z, fit1, fit2, stats, bc);
                    auto& out = slots[rep];
                    for (int r = 0; r < 2; ++r) {
                        out.reject[r * 3 + 0] = results[r].p_delta1 <= cfg.level;
                        out.reject[r * 3 + 1] = results[r].p_delta2 <= cfg.level;
                        out.reject[r * 3 + 2] = results[r].p_t <= cfg.level;
                    }
                    out.ok = true;
                } catch (const std::invalid_argument&) {
                } catch (const std::runtime_error&) {
                }
            });

            int failures = 0;
            std::array<int, 6> rejected{};
            for (const auto& slot : slots) {
                if (!slot.ok) {
                    ++failures;
                    continue;
                }
                for (int k = 0; k < 6; ++k) rejected[k] += slot.reject[k];
            }
            const int effective = reps - failures;
            if (effective == 0)
                throw std::runtime_error("every replicate failed for scenario " + label);

            for (int r = 0; r < 2; ++r) {
                for (int s = 0; s < 3; ++s) {
                    McRow row;
                    row.region = kRegions[r];
                    row.statistic = kStatistics[s];
                    row.n = n;
                    row.scenario = label;
                    row.rejection_rate = (double)rejected[r * 3 + s] / effective;
                    row.reps = effective;
                    row.failures = failures;
                    table.rows.push_back(std::move(row));
                }
            }
        }
    }
    return table;
}

void write_mc_csv(const McTable& table, std::ostream& out) {
    out << "region,statistic,n,scenario,rejection_rate,reps,failures\n";
    for (const auto& row : table.rows) {
        out << row.region << ',' << row.statistic << ',' << row.n << ',' << row.scenario
            << ',' << detail::shortest(row.rejection_rate) << ',' << row.reps << ','
            << row.failures << '\n';
    }
}

}  // namespace copred
