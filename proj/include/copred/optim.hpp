#pragma once

// Small dense BFGS maximizer with backtracking line search. Objectives
// supply the gradient analytically; there is no numerical differentiation
// on the optimization path.

#include <functional>
#include <vector>

namespace copred {

struct OptimOptions {
    int max_iter = 300;
    // convergence when ||grad||_inf <= gtol * max(1, |f|)
    double gtol = 1e-7;
    double step_tol = 1e-12;
};

struct OptimResult {
    std::vector<double> x;
    double f = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Maximizes f. The callable evaluates f(x) and writes the gradient into
// grad (same length as x).
using Objective = std::function<double(const std::vector<double>& x, std::vector<double>& grad)>;

OptimResult bfgs_maximize(const Objective& objective, std::vector<double> x0,
                          const OptimOptions& opts = {});

}  // namespace copred
