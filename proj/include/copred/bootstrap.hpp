#pragma once

// Moving block bootstrap calibration of the region statistics. Each
// replicate resamples (Y1, Y2, Z) rows jointly with one index vector,
// refits both marginal models, reruns the region pipeline, and centers
// the endpoint score at the original full-sample score. Replicates own
// independent random streams indexed by (replicate, attempt), so results
// are bit-identical under any thread count.

#include <cstdint>
#include <span>
#include <vector>

#include "copred/marginal.hpp"
#include "copred/rng.hpp"
#include "copred/score.hpp"

namespace copred {

struct BootstrapConfig {
    // which series feeds the automatic block length rule
    enum class Bandwidth { state, margin1, margin2 };

    int B = 499;
    int block_length = 0;  // 0 = automatic bandwidth rule
    std::uint64_t seed = 7121;
    bool iid = false;      // degenerate blocks of length one
    int threads = 0;       // 0 = hardware concurrency
    int max_redraws = 5;   // attempts per replicate before it counts as failed
    Bandwidth bandwidth_source = Bandwidth::state;
};

struct BootstrapResult {
    std::vector<double> t_draws;
    std::vector<double> delta1_draws;
    std::vector<double> delta2_draws;
    double p_t = 1.0;
    double p_delta1 = 1.0;
    double p_delta2 = 1.0;
    int block_length_used = 0;
    int failures = 0;
};

// Bartlett-kernel automatic bandwidth for an AR(1) fit with coefficient
// rho, rounded up and clamped to [1, floor(sqrt(n))]. rho magnitudes at or
// beyond 1 - 1e-6 are clamped first; *clamped reports that.
int block_length_from_rho(double rho, int n, bool* clamped = nullptr);

// The same rule driven by the least-squares AR(1) coefficient of the
// demeaned series.
int andrews_block_length(const std::vector<double>& z, bool* clamped = nullptr);

// Moving block bootstrap index vector: ceil(n/l) block starts drawn
// uniformly, blocks concatenated and truncated to length n. 0-based.
std::vector<int> mbb_indices(int n, int l, Rng& rng);

// Full calibration run. fit1/fit2 supply the marginal specs and warm-start
// parameters; `original` must come from the same grid and prefix grid and
// holds the observed statistics plus the stored endpoint scores used for
// centering. Throws std::runtime_error when more than 5% of replicates
// fail all their redraws.
BootstrapResult bootstrap_test(const std::vector<double>& y1, const std::vector<double>& y2,
                               const std::vector<double>& z, const MarginalFit& fit1,
                               const MarginalFit& fit2, const RegionStatistics& original,
                               const BootstrapConfig& cfg);

// Joint calibration of several regions of the same sample. Each replicate
// draws one index vector and refits the margins once; the region statistics
// are then recomputed per entry of `originals`, which must share the prefix
// grid. Result i belongs to originals[i]. Replicate streams match the
// single-region runner, so a one-element span reproduces bootstrap_test
// bit for bit.
std::vector<BootstrapResult> bootstrap_test_set(
    const std::vector<double>& y1, const std::vector<double>& y2,
    const std::vector<double>& z, const MarginalFit& fit1, const MarginalFit& fit2,
    std::span<const RegionStatistics> originals, const BootstrapConfig& cfg);

}  // namespace copred
