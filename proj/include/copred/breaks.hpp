#pragma once

// Break dating from the CUSUM bridge and the two-level sequential splitting
// scheme: test the full span, date a break when the CUSUM confirms one, and
// rerun the complete pipeline on both subsamples at corrected levels so the
// overall size stays at the nominal alpha.

#include <optional>
#include <string>
#include <vector>

#include "copred/bootstrap.hpp"
#include "copred/marginal.hpp"
#include "copred/score.hpp"

namespace copred {

struct SplitNode {
    double s_lo = 0.0;  // global prefix fractions of the span
    double s_hi = 1.0;
    int start = 0;      // global row span
    int length = 0;
    std::string date_lo;
    std::string date_hi;
    double level_used = 0.0;
    bool too_short = false;
    double delta1_agg = 0.0;  // aggregated statistics, set when the span was tested
    double delta2_agg = 0.0;
    double t_stat = 0.0;
    std::optional<double> t_pvalue;
    std::optional<double> delta1_pvalue;  // informational, same draws as the CUSUM stage
    std::optional<double> delta2_pvalue;
    std::optional<double> cusum_pvalue;   // set only when the dating stage ran
    double cusum_level = 0.0;  // set when the dating stage ran
    std::optional<double> break_s;     // global fraction
    std::optional<int> break_index;    // global 0-based index of the last
                                       // observation before the break
    std::string break_date;
    int block_length_used = 0;
    std::vector<SplitNode> children;   // empty or exactly two
};

struct SplitConfig {
    MarginalModelSpec spec1;
    MarginalModelSpec spec2;
    BootstrapConfig bootstrap;
    int min_length = 250;  // children shorter than this are not tested
    int s_stride = 1;      // prefix grid coarsening inside each span
};

// Fraction attaining the grid-maximum bridge norm. Throws when the bridge
// is identically zero.
double locate_break(const RegionStatistics& stats);

// Deterministic per-child bootstrap seed, exposed so a subsample pipeline
// can be reproduced in isolation.
std::uint64_t split_child_seed(std::uint64_t seed, int side);

// Two-level scheme: T on the full span at `alpha`; on rejection the CUSUM
// at 1 - (1-alpha)^(1/2); on confirmation the break is dated and T reruns
// on both subsamples at 1 - (1-alpha)^(1/4). dates, when given, must hold
// one label per row and fills the span and break labels.
SplitNode sequential_split(const std::vector<double>& y1, const std::vector<double>& y2,
                           const std::vector<double>& z, const DiagonalGrid& grid,
                           const SplitConfig& cfg, double alpha,
                           const std::vector<std::string>* dates = nullptr);

}  // namespace copred
