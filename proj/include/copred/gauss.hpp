#pragma once

// Scalar and bivariate Gaussian kernels plus the four-quadrant copula
// machinery used by the distribution-regression estimator. Everything here
// is pure and thread safe.

#include <array>

namespace copred {

// A point of the unit square at which the copula is evaluated.
struct GridPoint {
    double u1 = 0.5;
    double u2 = 0.5;
};

// Probabilities of the four quadrants cut at a grid point:
//   p1 = C(u1,u2), p2 = u1 - C, p3 = u2 - C, p4 = 1 - u1 - u2 + C.
// `floored` is set when any entry was clamped at the probability floor.
struct QuadrantProbs {
    std::array<double, 4> p{};
    bool floored = false;
};

// Correlations inside copula kernels are clamped to this magnitude.
inline constexpr double kRhoClamp = 1.0 - 1e-8;
// Quadrant probabilities are clamped from below at this floor.
inline constexpr double kProbFloor = 1e-10;
// Default half-width of the admissible interval for the Fisher-scale
// parameter alpha.
inline constexpr double kAlphaMax = 3.0;
// Signs of dC/drho in the four quadrant probabilities.
inline constexpr std::array<double, 4> kQuadrantSigns{1.0, -1.0, -1.0, 1.0};

// Throws std::domain_error unless u lies strictly inside the unit square.
void validate_grid_point(const GridPoint& u);

// Standard normal density.
double norm_pdf(double x);

// Standard normal CDF, absolute error near machine precision.
double norm_cdf(double x);

// Standard normal quantile (Wichura's algorithm). Throws std::domain_error
// for p outside (0,1).
double norm_quantile(double p);

// Bivariate standard normal CDF P(X <= z1, Y <= z2) with correlation rho,
// |rho| <= 1. Gauss-Legendre quadrature on the Drezner-Wesolowsky
// decomposition, absolute error below 5e-16. rho = +-1 degenerates to the
// comonotone / antimonotone bounds.
double bvn_cdf(double z1, double z2, double rho);

// Gaussian copula evaluated at an interior grid point. rho is clamped to
// |rho| <= 1 - 1e-8. The value is kept inside the open Frechet interval.
double copula_value(const GridPoint& u, double rho);

// Four quadrant probabilities at (u, rho), clamped at the floor.
QuadrantProbs quadrant_probs(const GridPoint& u, double rho);

// dC/drho, which equals the bivariate normal density at the coordinate
// quantiles (Plackett's identity).
double copula_drho(const GridPoint& u, double rho);

// d2C/drho2 in closed form.
double copula_ddrho(const GridPoint& u, double rho);

// Scale factor of the Fisher link at (u, alpha):
//   tau = (1 - rho^2) * dC/drho  with  rho = tanh(alpha).
double link_tau(const GridPoint& u, double alpha);

// Second derivative in alpha of the four-quadrant multinomial
// log-likelihood sum_j N_j log p_j(u, alpha). Negative in a neighbourhood
// of the maximizer (the likelihood is strictly concave in the copula value
// and monotone in alpha); used by the Newton cross-check of fit_alpha.
double loglik_hess_alpha(const GridPoint& u, double alpha,
                         const std::array<double, 4>& counts);

}  // namespace copred
