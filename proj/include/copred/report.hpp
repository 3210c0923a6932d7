#pragma once

// Regime descriptives of the filtered dependence (rank correlations and
// tail-dependence curves per state regime) and the end-to-end empirical
// pipeline, reported as a versioned JSON document.

#include <string>
#include <vector>

#include "copred/bootstrap.hpp"
#include "copred/data.hpp"
#include "copred/marginal.hpp"

namespace copred {

struct RegimeSummary {
    double state = 0.0;  // the z value defining the regime
    int count = 0;
    double spearman = 0.0;           // rank correlation, NaN below two members
    bool curves_suppressed = false;  // too few members for stable tail curves
    std::vector<double> q_lower;     // grid on (0, 0.5]
    std::vector<double> lower;       // C(q,q) / q
    std::vector<double> q_upper;     // grid on [0.5, 1)
    std::vector<double> upper;       // (1 - 2q + C(q,q)) / (1 - q)
};

struct DescriptiveReport {
    std::vector<double> u1, u2;  // full-sample ranks of the filtered residuals
    std::vector<int> regime;     // 0 or 1 per observation
    std::vector<RegimeSummary> regimes;  // exactly two, states 0 and 1
};

// Ranks the standardized residuals of the two fits over the whole sample,
// splits the observations by the binary state, and evaluates Spearman's rho
// plus quantile-dependence curves from each regime-conditional empirical
// copula on a q_step grid. Regimes with fewer than min_regime members keep
// the correlation but suppress the curves.
DescriptiveReport descriptive_report(const MarginalFit& fit1, const MarginalFit& fit2,
                                     const std::vector<double>& z, double q_step = 0.01,
                                     int min_regime = 50);

// Plot-data serializations: one row per observation with its regime label,
// and the long-format dependence curves.
std::string rank_pairs_csv(const DescriptiveReport& rep, const std::vector<std::string>& dates);
std::string dependence_curves_csv(const DescriptiveReport& rep);

struct AnalysisConfig {
    MarginalModelSpec asset_spec{true, true, true};    // AR(1) + state, GJR
    MarginalModelSpec market_spec{true, false, true};  // AR(1), GJR
    BootstrapConfig bootstrap;
    std::string state_rule = "down_market";
    std::vector<std::string> regions{"lower", "upper"};
    double alpha = 0.10;
    double grid_step = 0.05;
    int s_stride = 1;
    int min_length = 250;
    bool timings = false;  // wall-clock timings are opt-in so that the
                           // default document is byte-reproducible
    int json_indent = 2;
};

// Full pipeline on an ingested sample: state derivation, marginal fits,
// per-region statistics, bootstrap p-values and the sequential split tree.
// A constant state short-circuits into a degenerate-state warning. The
// document is byte-identical across runs for the same data and config as
// long as timings stay off.
std::string run_full_analysis(const DataSet& ds, const AnalysisConfig& cfg);

}  // namespace copred
