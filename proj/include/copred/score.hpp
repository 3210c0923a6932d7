#pragma once

// Sequential score process on a diagonal grid and the two detectors built
// from it: a CUSUM statistic over prefix fractions (sensitive to breaks in
// the state effect) and an LM statistic at the full sample (sensitive to a
// constant effect). Per-point statistics are aggregated over the grid with
// a log-integral of exp(f/2).

#include <vector>

#include "copred/dr.hpp"
#include "copred/gauss.hpp"
#include "copred/marginal.hpp"
#include "copred/ranks.hpp"

namespace copred {

struct DiagonalGrid {
    enum class Region { lower, upper };

    Region region = Region::lower;
    std::vector<GridPoint> points;  // (q, q), equally spaced
    double step = 0.05;

    // lower: q in [0.05, 0.50], upper: q in [0.50, 0.95]
    static DiagonalGrid make(Region region, double step = 0.05);

    // trapezoid weights step * (1/2, 1, ..., 1, 1/2)
    std::vector<double> weights() const;
};

// Scaled score in the state coefficients, evaluated along sample prefixes
// at the full-sample restricted fit. Rows are sqrt(n) * grad_beta of the
// prefix log-likelihood; the row for an empty prefix is zero.
struct ScoreProcess {
    GridPoint u;
    double alpha_hat = 0.0;
    std::vector<double> s_grid;      // prefix fractions, last entry 1
    int k = 1;                       // state dimension
    std::vector<double> beta_score;  // row-major, |s_grid| x k
    double alpha_score_end = 0.0;    // intercept component at s = 1
    bool p_floor_hit = false;

    double at(int row, int d) const { return beta_score[(size_t)row * k + d]; }
};

ScoreProcess score_process(const RankPanel& panel, const std::vector<double>& z,
                           const GridPoint& u, double alpha_hat,
                           const std::vector<double>& s_grid);

// sup over the s-grid of |beta_score(s) - s * beta_score(1)|_inf
double cusum_delta1(const ScoreProcess& sp);

// |beta_score(1)|_inf
double lm_delta2(const ScoreProcess& sp);

// log of the trapezoid approximation of the integral of exp(f/2) over the
// region, computed with a max shift. f holds one value per grid point.
double aggregate_omega(const DiagonalGrid& grid, const std::vector<double>& f);

// Everything the downstream calibration needs from one grid point.
struct PointStatistics {
    GridPoint u;
    RestrictedFit fit;
    double delta1 = 0.0;
    double delta2 = 0.0;
    std::vector<double> score_end;  // beta row at s = 1
    bool p_floor_hit = false;
};

struct RegionStatistics {
    DiagonalGrid grid;
    std::vector<double> s_grid;
    std::vector<PointStatistics> points;
    std::vector<double> delta1;      // per grid point
    std::vector<double> delta2;      // per grid point
    double delta1_agg = 0.0;         // omega(delta1)
    double delta2_agg = 0.0;         // omega(delta2)
    double t_stat = 0.0;             // omega(delta1 + delta2)
    std::vector<double> bridge_sup;  // per s, grid maximum of |bridge|_inf
    double argmax_s = 1.0;           // fraction attaining max of bridge_sup
};

// Full prefix grid {t/n : t = 1..n}, optionally keeping every stride-th
// fraction (the endpoint 1 is always kept).
std::vector<double> make_s_grid(int n, int stride = 1);

// Per-point pipeline fit_alpha -> score process -> detectors, sharing one
// incremental scan across the grid, then omega aggregation.
RegionStatistics run_region_test(const RankPanel& panel, const std::vector<double>& z,
                                 const DiagonalGrid& grid,
                                 const std::vector<double>& s_grid);
RegionStatistics run_region_test(const MarginalFit& fit1, const MarginalFit& fit2,
                                 const std::vector<double>& z, const DiagonalGrid& grid,
                                 const std::vector<double>& s_grid);

}  // namespace copred
