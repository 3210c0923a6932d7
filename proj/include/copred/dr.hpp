#pragma once

// Restricted pointwise estimator of the local correlation at a grid point
// from full-sample quadrant counts. The likelihood is a 4-cell multinomial
// whose cell probabilities are determined by the copula value C alone, so
// the solve runs in C first (strictly concave there) and only then maps
// back through rho to the link scale.

#include <array>

#include "copred/gauss.hpp"

namespace copred {

struct RestrictedFit {
    double alpha_hat = 0.0;
    double rho_hat = 0.0;   // tanh(alpha_hat)
    double c_hat = 0.0;     // copula value at the fitted correlation
    bool boundary_flag = false;
};

// Maximizes sum_j counts_j log p_j(u, C) over the open Frechet interval,
// inverts C(u; rho) = C_hat, and clamps alpha to [-kAlphaMax, kAlphaMax].
// boundary_flag marks a clamped fit: the likelihood is still ascending at
// the clamp, which covers every configuration pinned to a Frechet bound.
// When the flag is clear, the alpha score at the optimum is below 1e-8
// per observation.
RestrictedFit fit_alpha(const GridPoint& u, const std::array<double, 4>& counts);

// Safeguarded Newton directly on the alpha scale. Slower and kept as a
// cross-check of the C-space solve.
RestrictedFit fit_alpha_newton(const GridPoint& u, const std::array<double, 4>& counts);

// Monotone inversion of C(u; rho) = c for rho within [rho_lo, rho_hi].
// c must lie between the copula values at the bracket ends.
double invert_copula_rho(const GridPoint& u, double c, double rho_lo, double rho_hi);

// Multinomial log-likelihood at the given link value, for probes.
double restricted_loglik(const GridPoint& u, double alpha,
                         const std::array<double, 4>& counts);

}  // namespace copred
