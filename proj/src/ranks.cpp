#include "copred/ranks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace copred {

namespace {

// Fenwick tree over sorted positions 1..n holding 0/1 membership of the
// inserted prefix. find_kth uses binary lifting on the implicit tree.
class Fenwick {
  public:
    explicit Fenwick(int n) : n_(n), tree_(n + 1, 0) {
        log2_ = 0;
        while ((1 << (log2_ + 1)) <= n_) ++log2_;
    }
    void add(int i, int delta) {
        for (; i <= n_; i += i & -i) tree_[i] += delta;
    }
    int prefix(int i) const {
        int s = 0;
        for (; i > 0; i -= i & -i) s += tree_[i];
        return s;
    }
    // smallest position p with prefix(p) >= k; requires 1 <= k <= total
    int find_kth(int k) const {
        int pos = 0;
        for (int step = 1 << log2_; step > 0; step >>= 1) {
            const int next = pos + step;
            if (next <= n_ && tree_[next] < k) {
                pos = next;
                k -= tree_[next];
            }
        }
        return pos + 1;
    }

  private:
    int n_;
    int log2_;
    std::vector<int> tree_;
};

}  // namespace

RankPanel::RankPanel(std::vector<double> eps1, std::vector<double> eps2)
    : n_((int)eps1.size()), eps_{std::move(eps1), std::move(eps2)} {
    if (n_ < 1) throw std::invalid_argument("rank panel needs at least one observation");
    if ((int)eps_[1].size() != n_)
        throw std::invalid_argument("rank panel margins differ in length");
    for (int j = 0; j < 2; ++j) {
        for (double v : eps_[j])
            if (!std::isfinite(v)) throw std::invalid_argument("non-finite residual");
        auto& ord = order_[j];
        ord.resize(n_);
        std::iota(ord.begin(), ord.end(), 0);
        std::sort(ord.begin(), ord.end(), [&](int a, int b) {
            if (eps_[j][a] != eps_[j][b]) return eps_[j][a] < eps_[j][b];
            return a < b;
        });
        pos_[j].resize(n_);
        for (int p = 0; p < n_; ++p) pos_[j][ord[p]] = p + 1;
        tie_begin_[j].resize(n_);
        tie_end_[j].resize(n_);
        int i = 0;
        while (i < n_) {
            int k = i;
            while (k + 1 < n_ && eps_[j][ord[k + 1]] == eps_[j][ord[i]]) ++k;
            for (int p = i; p <= k; ++p) {
                tie_begin_[j][p] = i + 1;
                tie_end_[j][p] = k + 1;
            }
            i = k + 1;
        }
    }
}

int rank_threshold(double u, int m) {
    int k = (int)std::floor(u * m);
    k = std::clamp(k, 0, m);
    // settle the floating boundary exactly as the event comparison sees it
    while (k + 1 <= m && (double)(k + 1) / m <= u) ++k;
    while (k > 0 && (double)k / m > u) --k;
    return k;
}

double sequential_rank_u(const RankPanel& panel, int margin, int t, int m) {
    if (m < 1 || m > panel.size() || t < 0 || t >= m)
        throw std::invalid_argument("sequential rank query out of range");
    const int te = panel.tie_end(margin, panel.position(margin, t));
    int cnt = 0;
    for (int r = 0; r < m; ++r) cnt += (panel.position(margin, r) <= te);
    return (double)cnt / m;
}

namespace {

// Event flags 1{U_hat_{j,t,m} <= u_j} for all t < m, one margin.
std::vector<unsigned char> prefix_events(const RankPanel& panel, int margin,
                                         double u, int m) {
    const auto& e = panel.residuals(margin);
    std::vector<double> sorted(e.begin(), e.begin() + m);
    std::sort(sorted.begin(), sorted.end());
    const int k = rank_threshold(u, m);
    std::vector<unsigned char> ev(m);
    for (int t = 0; t < m; ++t) {
        const int cnt =
            (int)(std::upper_bound(sorted.begin(), sorted.end(), e[t]) - sorted.begin());
        ev[t] = cnt <= k;
    }
    return ev;
}

}  // namespace

std::array<int, 4> quadrant_counts(const RankPanel& panel, const GridPoint& u, int m) {
    validate_grid_point(u);
    if (m < 1 || m > panel.size())
        throw std::invalid_argument("quadrant prefix out of range");
    const auto ev1 = prefix_events(panel, 0, u.u1, m);
    const auto ev2 = prefix_events(panel, 1, u.u2, m);
    std::array<int, 4> counts{0, 0, 0, 0};
    for (int t = 0; t < m; ++t) {
        const int q = ev1[t] ? (ev2[t] ? 0 : 1) : (ev2[t] ? 2 : 3);
        ++counts[q];
    }
    return counts;
}

std::array<std::vector<double>, 4> weighted_quadrant_partials(
    const RankPanel& panel, std::span<const double> marks, int dim,
    const GridPoint& u, int m) {
    validate_grid_point(u);
    if (m < 1 || m > panel.size())
        throw std::invalid_argument("quadrant prefix out of range");
    if ((int)marks.size() < m * dim)
        throw std::invalid_argument("marks shorter than prefix");
    const auto ev1 = prefix_events(panel, 0, u.u1, m);
    const auto ev2 = prefix_events(panel, 1, u.u2, m);
    std::array<std::vector<double>, 4> out;
    for (auto& q : out) q.assign(dim, 0.0);
    for (int t = 0; t < m; ++t) {
        const int q = ev1[t] ? (ev2[t] ? 0 : 1) : (ev2[t] ? 2 : 3);
        const double* xt = marks.data() + (size_t)t * dim;
        for (int d = 0; d < dim; ++d) out[q][d] += xt[d];
    }
    return out;
}

namespace {

// Per-margin incremental state of the scan for one grid point. Membership
// of observation t is equivalent to position(t) <= boundary, where the
// boundary is the last sorted position whose tie group lies fully below the
// (k+1)-th smallest inserted value.
struct MarginState {
    int boundary = 0;
    std::vector<unsigned char> in;
    std::vector<double> wsum;
};

int boundary_for(const RankPanel& panel, int margin, const Fenwick& fen, double u,
                 int m) {
    const int k = rank_threshold(u, m);
    if (k <= 0) return 0;
    if (k >= m) return panel.size();
    const int q = fen.find_kth(k + 1);
    return panel.tie_begin(margin, q) - 1;
}

}  // namespace

SequentialScan sequential_quadrant_scan(const RankPanel& panel,
                                        std::span<const double> marks, int dim,
                                        std::span<const GridPoint> points,
                                        const std::vector<int>& record_at) {
    const int n = panel.size();
    const int g = (int)points.size();
    if (dim < 1) throw std::invalid_argument("mark dimension must be positive");
    if ((int)marks.size() < n * dim) throw std::invalid_argument("marks shorter than panel");
    if (record_at.empty()) throw std::invalid_argument("no prefixes to record");
    for (size_t i = 0; i < record_at.size(); ++i) {
        if (record_at[i] < 1 || record_at[i] > n ||
            (i > 0 && record_at[i] <= record_at[i - 1]))
            throw std::invalid_argument("recorded prefixes must be increasing in [1, n]");
    }
    for (const auto& u : points) validate_grid_point(u);

    SequentialScan scan;
    scan.prefixes = record_at;
    const int rows = (int)scan.prefixes.size();

    scan.paths.resize(g);
    for (int i = 0; i < g; ++i) {
        scan.paths[i].u = points[i];
        scan.paths[i].dim = dim;
        scan.paths[i].rows = rows;
        scan.paths[i].sums.assign((size_t)rows * 4 * dim, 0.0);
    }

    std::array<Fenwick, 2> fen{Fenwick(n), Fenwick(n)};
    // state[margin][grid point]
    std::array<std::vector<MarginState>, 2> state;
    std::vector<std::vector<double>> wboth(g);
    for (int j = 0; j < 2; ++j) {
        state[j].resize(g);
        for (int i = 0; i < g; ++i) {
            state[j][i].in.assign(n, 0);
            state[j][i].wsum.assign(dim, 0.0);
        }
    }
    for (int i = 0; i < g; ++i) wboth[i].assign(dim, 0.0);
    std::vector<double> wtot(dim, 0.0);

    // Toggles membership of every inserted element with position in
    // (lo, hi], enumerated by rank through the Fenwick.
    auto sweep = [&](int margin, int i, int lo, int hi, bool add) {
        MarginState& self = state[margin][i];
        const MarginState& other = state[1 - margin][i];
        const Fenwick& f = fen[margin];
        const int r_lo = f.prefix(lo);
        const int r_hi = f.prefix(hi);
        for (int r = r_lo + 1; r <= r_hi; ++r) {
            const int p = f.find_kth(r);
            const int t = panel.at_position(margin, p);
            const double* xt = marks.data() + (size_t)t * dim;
            self.in[t] = add;
            const double sign = add ? 1.0 : -1.0;
            for (int d = 0; d < dim; ++d) self.wsum[d] += sign * xt[d];
            if (other.in[t])
                for (int d = 0; d < dim; ++d) wboth[i][d] += sign * xt[d];
        }
    };

    size_t row = 0;
    for (int m = 1; m <= n; ++m) {
        const int t = m - 1;
        const std::array<int, 2> p{panel.position(0, t), panel.position(1, t)};
        fen[0].add(p[0], 1);
        fen[1].add(p[1], 1);
        const double* xt = marks.data() + (size_t)t * dim;
        for (int d = 0; d < dim; ++d) wtot[d] += xt[d];

        for (int i = 0; i < g; ++i) {
            // seed the new element against the previous boundaries, then
            // move each boundary to its position for prefix length m
            for (int j = 0; j < 2; ++j) {
                if (p[j] <= state[j][i].boundary) {
                    state[j][i].in[t] = 1;
                    for (int d = 0; d < dim; ++d) state[j][i].wsum[d] += xt[d];
                }
            }
            if (state[0][i].in[t] && state[1][i].in[t])
                for (int d = 0; d < dim; ++d) wboth[i][d] += xt[d];

            for (int j = 0; j < 2; ++j) {
                const double u = (j == 0) ? points[i].u1 : points[i].u2;
                const int b_new = boundary_for(panel, j, fen[j], u, m);
                const int b_old = state[j][i].boundary;
                if (b_new > b_old)
                    sweep(j, i, b_old, b_new, true);
                else if (b_new < b_old)
                    sweep(j, i, b_new, b_old, false);
                state[j][i].boundary = b_new;
            }
        }

        if (row < scan.prefixes.size() && m == scan.prefixes[row]) {
            for (int i = 0; i < g; ++i) {
                double* out = scan.paths[i].sums.data() + row * 4 * (size_t)dim;
                for (int d = 0; d < dim; ++d) {
                    const double q1 = wboth[i][d];
                    const double w1 = state[0][i].wsum[d];
                    const double w2 = state[1][i].wsum[d];
                    out[0 * dim + d] = q1;
                    out[1 * dim + d] = w1 - q1;
                    out[2 * dim + d] = w2 - q1;
                    out[3 * dim + d] = wtot[d] - w1 - w2 + q1;
                }
            }
            ++row;
        }
    }
    return scan;
}

SequentialScan sequential_quadrant_scan(const RankPanel& panel,
                                        std::span<const double> marks, int dim,
                                        std::span<const GridPoint> points,
                                        int stride) {
    if (stride < 1) throw std::invalid_argument("prefix stride must be positive");
    const int n = panel.size();
    std::vector<int> record_at;
    for (int m = stride; m <= n; m += stride) record_at.push_back(m);
    if (record_at.empty() || record_at.back() != n) record_at.push_back(n);
    return sequential_quadrant_scan(panel, marks, dim, points, record_at);
}

}  // namespace copred
