#pragma once

// Location-scale filtering of each margin. The mean is AR(1) with an
// optional exogenous regressor, the variance is GARCH(1,1) with an optional
// sign-asymmetry term. Fitting is Gaussian QML via BFGS on an unconstrained
// reparametrization with analytic gradients; residuals are the
// standardized innovations that feed the rank panel.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace copred {

struct MarginalModelSpec {
    bool ar = true;     // phi * y_{t-1} in the mean
    bool exog = false;  // gamma * z_t in the mean
    bool gjr = false;   // extra eta^2 1{eta<0} term in the variance
};

struct MarginalParams {
    double mu = 0.0;
    double phi = 0.0;
    double gamma = 0.0;
    double omega = 0.01;
    double arch = 0.05;
    double gjr = 0.0;
    double garch = 0.90;
};

// Deterministic pass of the recursions at fixed parameters.
struct FilterOutput {
    std::vector<double> eta;     // mean-model residuals
    std::vector<double> sigma2;  // conditional variances
    std::vector<double> eps;     // standardized residuals eta/sqrt(sigma2)
    double loglik = 0.0;         // Gaussian log-likelihood
};

struct MarginalFit {
    MarginalModelSpec spec;
    MarginalParams params;
    std::vector<double> residuals;   // standardized, length n
    std::vector<double> sigma2;      // conditional variances, length n
    double loglik = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    // asymptotic standard errors on the natural scale, ordered
    // (mu, phi?, gamma?, omega, arch, gjr?, garch) for the present terms
    std::vector<double> std_errors;
};

// Thrown when no optimizer start converges; carries the best fit found.
class ConvergenceError : public std::runtime_error {
  public:
    ConvergenceError(std::string what, MarginalFit best)
        : std::runtime_error(std::move(what)), best_fit(std::move(best)) {}
    MarginalFit best_fit;
};

struct FitOptions {
    int restarts = 3;            // random restarts after the moment start
    std::uint64_t seed = 1234;   // restart perturbation stream
    const MarginalParams* warm_start = nullptr;
    int max_iter = 300;
    double gtol = 1e-7;
};

// Runs the recursions at the given parameters. z may be empty unless
// spec.exog is set. Presample conventions: y_0 is the sample mean of y,
// eta_0 = 0, and sigma2_1 is the sample variance of the mean residuals.
FilterOutput marginal_filter(const MarginalModelSpec& spec, const MarginalParams& params,
                             const std::vector<double>& y, const std::vector<double>& z);

// Gaussian QML fit. Throws ConvergenceError when every start fails, and
// std::invalid_argument when the optimum is non-stationary (|phi| >= 1).
MarginalFit fit_marginal(const std::vector<double>& y, const std::vector<double>& z,
                         const MarginalModelSpec& spec, const FitOptions& options = {});

// Least-squares AR(1) coefficient of a demeaned series.
double ar1_coefficient(const std::vector<double>& z);

}  // namespace copred
