#include "copred/score.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace copred {

namespace {

// Prefix length for a fraction. The nudge keeps exact lattice fractions
// t/n from landing one short after the double round trip.
int prefix_for(double s, int n) {
    if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("prefix fraction outside [0, 1]");
    const int m = (int)std::floor(s * n + 1e-9);
    return std::clamp(m, 0, n);
}

void validate_s_grid(const std::vector<double>& s_grid) {
    if (s_grid.empty() || s_grid.back() != 1.0)
        throw std::invalid_argument("prefix grid must end at 1");
    for (size_t i = 0; i < s_grid.size(); ++i)
        if (i > 0 && s_grid[i] <= s_grid[i - 1])
            throw std::invalid_argument("prefix grid must increase");
}

// Signed inverse probabilities e_j / p_j at the restricted fit.
std::array<double, 4> quadrant_weights(const QuadrantProbs& probs) {
    std::array<double, 4> w;
    for (int j = 0; j < 4; ++j) w[j] = kQuadrantSigns[j] / probs.p[j];
    return w;
}

}  // namespace

DiagonalGrid DiagonalGrid::make(Region region, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("grid step must be positive");
    const double lo = region == Region::lower ? 0.05 : 0.50;
    const double hi = region == Region::lower ? 0.50 : 0.95;
    const int count = (int)std::lround((hi - lo) / step) + 1;
    if (count < 2 || std::abs(lo + (count - 1) * step - hi) > 1e-9)
        throw std::invalid_argument("grid step must divide the region");
    DiagonalGrid grid;
    grid.region = region;
    grid.step = step;
    grid.points.reserve(count);
    for (int i = 0; i < count; ++i) {
        const double q = (i == count - 1) ? hi : lo + i * step;
        grid.points.push_back({q, q});
        validate_grid_point(grid.points.back());
    }
    return grid;
}

std::vector<double> DiagonalGrid::weights() const {
    if (points.size() < 2) throw std::invalid_argument("grid needs at least two points");
    std::vector<double> w(points.size(), step);
    w.front() = 0.5 * step;
    w.back() = 0.5 * step;
    return w;
}

std::vector<double> make_s_grid(int n, int stride) {
    if (n < 1 || stride < 1) throw std::invalid_argument("bad prefix grid request");
    std::vector<double> s;
    for (int t = stride; t <= n; t += stride) s.push_back((double)t / n);
    if (s.empty() || s.back() != 1.0) s.push_back(1.0);
    return s;
}

double cusum_delta1(const ScoreProcess& sp) {
    if (sp.s_grid.empty() || sp.s_grid.back() != 1.0)
        throw std::invalid_argument("score process must end at s = 1");
    const int rows = (int)sp.s_grid.size();
    double sup = 0.0;
    for (int i = 0; i < rows; ++i) {
        const double s = sp.s_grid[i];
        for (int d = 0; d < sp.k; ++d) {
            const double bridge = sp.at(i, d) - s * sp.at(rows - 1, d);
            sup = std::max(sup, std::abs(bridge));
        }
    }
    return sup;
}

double lm_delta2(const ScoreProcess& sp) {
    if (sp.s_grid.empty() || sp.s_grid.back() != 1.0)
        throw std::invalid_argument("score process must end at s = 1");
    const int rows = (int)sp.s_grid.size();
    double norm = 0.0;
    for (int d = 0; d < sp.k; ++d) norm = std::max(norm, std::abs(sp.at(rows - 1, d)));
    return norm;
}

double aggregate_omega(const DiagonalGrid& grid, const std::vector<double>& f) {
    if (f.size() != grid.points.size())
        throw std::invalid_argument("aggregation input does not match the grid");
    for (double v : f)
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite aggregation input");
    const auto w = grid.weights();
    const double shift = *std::max_element(f.begin(), f.end());
    double sum = 0.0;
    for (size_t i = 0; i < f.size(); ++i) sum += w[i] * std::exp(0.5 * (f[i] - shift));
    return 0.5 * shift + std::log(sum);
}

namespace {

// Shared core: one incremental scan over the panel serves every grid point;
// the recorded raw quadrant sums are then weighted per point.
struct ScanLayout {
    std::vector<int> record_at;   // strictly increasing prefixes, last = n
    std::vector<int> row_of;      // s index -> recorded row, -1 for empty prefix
};

ScanLayout plan_scan(const std::vector<double>& s_grid, int n) {
    validate_s_grid(s_grid);
    ScanLayout layout;
    layout.row_of.resize(s_grid.size());
    for (size_t i = 0; i < s_grid.size(); ++i) {
        const int m = prefix_for(s_grid[i], n);
        if (m == 0) {
            layout.row_of[i] = -1;
            continue;
        }
        if (layout.record_at.empty() || layout.record_at.back() != m)
            layout.record_at.push_back(m);
        layout.row_of[i] = (int)layout.record_at.size() - 1;
    }
    if (layout.record_at.empty() || layout.record_at.back() != n)
        throw std::invalid_argument("prefix grid must reach the full sample");
    return layout;
}

std::vector<double> intercept_state_marks(const std::vector<double>& z, int n) {
    if ((int)z.size() != n) throw std::invalid_argument("state series length mismatch");
    std::vector<double> marks(2 * (size_t)n);
    for (int t = 0; t < n; ++t) {
        marks[2 * (size_t)t] = 1.0;
        marks[2 * (size_t)t + 1] = z[t];
    }
    return marks;
}

}  // namespace

ScoreProcess score_process(const RankPanel& panel, const std::vector<double>& z,
                           const GridPoint& u, double alpha_hat,
                           const std::vector<double>& s_grid) {
    const int n = panel.size();
    const auto layout = plan_scan(s_grid, n);
    const auto marks = intercept_state_marks(z, n);
    const GridPoint pts[1] = {u};
    const auto scan = sequential_quadrant_scan(panel, marks, 2, pts, layout.record_at);
    const auto& path = scan.paths[0];

    const auto probs = quadrant_probs(u, std::tanh(alpha_hat));
    const auto w = quadrant_weights(probs);
    const double scale = link_tau(u, alpha_hat) / std::sqrt((double)n);

    ScoreProcess sp;
    sp.u = u;
    sp.alpha_hat = alpha_hat;
    sp.s_grid = s_grid;
    sp.k = 1;
    sp.p_floor_hit = probs.floored;
    sp.beta_score.assign(s_grid.size(), 0.0);
    for (size_t i = 0; i < s_grid.size(); ++i) {
        const int r = layout.row_of[i];
        if (r < 0) continue;
        double acc = 0.0;
        for (int j = 0; j < 4; ++j) acc += w[j] * path.at(r, j, 1);
        sp.beta_score[i] = scale * acc;
    }
    {
        const int last = (int)layout.record_at.size() - 1;
        double acc = 0.0;
        for (int j = 0; j < 4; ++j) acc += w[j] * path.at(last, j, 0);
        sp.alpha_score_end = scale * acc;
    }
    return sp;
}

RegionStatistics run_region_test(const RankPanel& panel, const std::vector<double>& z,
                                 const DiagonalGrid& grid,
                                 const std::vector<double>& s_grid) {
    const int n = panel.size();
    const auto layout = plan_scan(s_grid, n);
    const auto marks = intercept_state_marks(z, n);
    const auto scan = sequential_quadrant_scan(panel, marks, 2, grid.points, layout.record_at);
    const int last = (int)layout.record_at.size() - 1;
    const double root_n = std::sqrt((double)n);

    RegionStatistics out;
    out.grid = grid;
    out.s_grid = s_grid;
    out.points.resize(grid.points.size());
    out.delta1.resize(grid.points.size());
    out.delta2.resize(grid.points.size());
    out.bridge_sup.assign(s_grid.size(), 0.0);

    for (size_t i = 0; i < grid.points.size(); ++i) {
        const auto& path = scan.paths[i];
        PointStatistics& ps = out.points[i];
        ps.u = grid.points[i];

        std::array<double, 4> counts;
        for (int j = 0; j < 4; ++j) counts[j] = path.at(last, j, 0);
        ps.fit = fit_alpha(ps.u, counts);

        const auto probs = quadrant_probs(ps.u, ps.fit.rho_hat);
        const auto w = quadrant_weights(probs);
        const double scale = link_tau(ps.u, ps.fit.alpha_hat) / root_n;
        ps.p_floor_hit = probs.floored;

        double end = 0.0;
        for (int j = 0; j < 4; ++j) end += w[j] * path.at(last, j, 1);
        end *= scale;
        ps.score_end.assign(1, end);
        ps.delta2 = std::abs(end);

        double sup = 0.0;
        for (size_t r = 0; r < s_grid.size(); ++r) {
            const int row = layout.row_of[r];
            double val = 0.0;
            if (row >= 0) {
                for (int j = 0; j < 4; ++j) val += w[j] * path.at(row, j, 1);
                val *= scale;
            }
            const double bridge = std::abs(val - s_grid[r] * end);
            sup = std::max(sup, bridge);
            out.bridge_sup[r] = std::max(out.bridge_sup[r], bridge);
        }
        ps.delta1 = sup;
        out.delta1[i] = sup;
        out.delta2[i] = ps.delta2;
    }

    std::vector<double> both(out.delta1.size());
    for (size_t i = 0; i < both.size(); ++i) both[i] = out.delta1[i] + out.delta2[i];
    out.delta1_agg = aggregate_omega(grid, out.delta1);
    out.delta2_agg = aggregate_omega(grid, out.delta2);
    out.t_stat = aggregate_omega(grid, both);

    const auto it = std::max_element(out.bridge_sup.begin(), out.bridge_sup.end());
    out.argmax_s = s_grid[(size_t)(it - out.bridge_sup.begin())];
    return out;
}

RegionStatistics run_region_test(const MarginalFit& fit1, const MarginalFit& fit2,
                                 const std::vector<double>& z, const DiagonalGrid& grid,
                                 const std::vector<double>& s_grid) {
    RankPanel panel(fit1.residuals, fit2.residuals);
    return run_region_test(panel, z, grid, s_grid);
}

}  // namespace copred
