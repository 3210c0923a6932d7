#pragma once

// Sequential (prefix-recomputed) ranks of the two residual margins and the
// quadrant statistics built from them. For every prefix length m the rank
// of an observation is its empirical-CDF count among the first m values
// only; nothing is carried over from longer prefixes. The scanner at the
// bottom produces quadrant-weighted sums across all prefixes in
// O(n log n) per grid point instead of the naive O(n^2 log n).

#include <array>
#include <span>
#include <vector>

#include "copred/gauss.hpp"

namespace copred {

// Sort permutations and tie groups of the two margins. Ties are ordered by
// (value, time index) so every permutation is deterministic, while rank
// counts always include all tied values.
class RankPanel {
  public:
    RankPanel(std::vector<double> eps1, std::vector<double> eps2);

    int size() const { return n_; }
    const std::vector<double>& residuals(int margin) const { return eps_[margin]; }

    // 1-based position of observation t in the full-sample sort order.
    int position(int margin, int t) const { return pos_[margin][t]; }
    // observation at 1-based sorted position p
    int at_position(int margin, int p) const { return order_[margin][p - 1]; }
    // last 1-based sorted position holding a value equal to the one at p
    int tie_end(int margin, int p) const { return tie_end_[margin][p - 1]; }
    // first 1-based sorted position holding a value equal to the one at p
    int tie_begin(int margin, int p) const { return tie_begin_[margin][p - 1]; }

  private:
    int n_;
    std::array<std::vector<double>, 2> eps_;
    std::array<std::vector<int>, 2> order_;
    std::array<std::vector<int>, 2> pos_;
    std::array<std::vector<int>, 2> tie_begin_;
    std::array<std::vector<int>, 2> tie_end_;
};

// Empirical CDF value of observation t within the prefix of length m:
// (1/m) #{ r < m : eps_r <= eps_t }, for 0-based t < m <= n.
double sequential_rank_u(const RankPanel& panel, int margin, int t, int m);

// Quadrant counts of the prefix of length m at grid point u, ordered as
// (both events, margin-1 only, margin-2 only, neither).
std::array<int, 4> quadrant_counts(const RankPanel& panel, const GridPoint& u, int m);

// Quadrant sums of mark vectors over the prefix of length m. marks is a
// row-major n-by-dim matrix. Result indexed [quadrant][dim].
std::array<std::vector<double>, 4> weighted_quadrant_partials(
    const RankPanel& panel, std::span<const double> marks, int dim,
    const GridPoint& u, int m);

// One grid point's output of the sequential scan: quadrant-weighted mark
// sums at each recorded prefix, flattened as [prefix][quadrant][dim].
struct QuadrantPath {
    GridPoint u;
    std::vector<double> sums;
    int dim = 0;
    int rows = 0;
    double at(int row, int quadrant, int d) const {
        return sums[((size_t)row * 4 + quadrant) * dim + d];
    }
};

// Runs the incremental scan over every prefix 1..n, recording rows at the
// requested prefixes. Returns one path per grid point; all paths share the
// same recorded prefixes.
struct SequentialScan {
    std::vector<int> prefixes;
    std::vector<QuadrantPath> paths;
};
// record_at must be strictly increasing with values in [1, n]
SequentialScan sequential_quadrant_scan(const RankPanel& panel,
                                        std::span<const double> marks, int dim,
                                        std::span<const GridPoint> points,
                                        const std::vector<int>& record_at);
// records at m = stride, 2*stride, ... and always at m = n
SequentialScan sequential_quadrant_scan(const RankPanel& panel,
                                        std::span<const double> marks, int dim,
                                        std::span<const GridPoint> points,
                                        int stride = 1);

// Largest event count k such that the rank event "count/m <= u" holds for
// rank k, under the exact floating comparison used everywhere.
int rank_threshold(double u, int m);

}  // namespace copred
