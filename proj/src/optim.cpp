#include "copred/optim.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace copred {

namespace {

double inf_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

OptimResult bfgs_maximize(const Objective& objective, std::vector<double> x0,
                          const OptimOptions& opts) {
    const int n = (int)x0.size();
    OptimResult res;
    res.x = std::move(x0);

    std::vector<double> grad(n), grad_new(n), direction(n), x_new(n);
    std::vector<double> s(n), y(n), hy(n);
    // inverse Hessian approximation, identity to start
    std::vector<double> H((size_t)n * n, 0.0);
    for (int i = 0; i < n; ++i) H[(size_t)i * n + i] = 1.0;

    double f = objective(res.x, grad);
    if (!std::isfinite(f)) {
        res.f = f;
        return res;
    }

    for (res.iterations = 0; res.iterations < opts.max_iter; ++res.iterations) {
        res.grad_norm = inf_norm(grad);
        if (res.grad_norm <= opts.gtol * std::max(1.0, std::fabs(f))) {
            res.converged = true;
            break;
        }

        // ascent direction d = H g
        for (int i = 0; i < n; ++i) {
            double v = 0.0;
            for (int j = 0; j < n; ++j) v += H[(size_t)i * n + j] * grad[j];
            direction[i] = v;
        }
        double slope = dot(direction, grad);
        if (!(slope > 0.0)) {
            // reset to steepest ascent if the approximation went bad
            std::fill(H.begin(), H.end(), 0.0);
            for (int i = 0; i < n; ++i) H[(size_t)i * n + i] = 1.0;
            direction = grad;
            slope = dot(grad, grad);
            if (slope == 0.0) {
                res.converged = true;
                break;
            }
        }

        // backtracking Armijo line search
        double step = 1.0;
        double f_new = -HUGE_VAL;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            for (int i = 0; i < n; ++i) x_new[i] = res.x[i] + step * direction[i];
            f_new = objective(x_new, grad_new);
            if (std::isfinite(f_new) && f_new >= f + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted || inf_norm(direction) * step <= opts.step_tol) {
            // no further progress possible at working precision
            res.grad_norm = inf_norm(grad);
            res.converged = res.grad_norm <= 1e3 * opts.gtol * std::max(1.0, std::fabs(f));
            break;
        }

        for (int i = 0; i < n; ++i) {
            s[i] = x_new[i] - res.x[i];
            y[i] = grad_new[i] - grad[i];
        }
        res.x = x_new;
        f = f_new;
        grad = grad_new;

        // BFGS update of the inverse Hessian (maximization: y flips sign
        // relative to the textbook minimization form, handled by using
        // sy = s.(-y) ... kept explicit below)
        const double sy = -dot(s, y);  // positive near a maximum
        if (sy > 1e-12 * inf_norm(s) * std::max(1e-12, inf_norm(y))) {
            for (int i = 0; i < n; ++i) {
                double v = 0.0;
                for (int j = 0; j < n; ++j) v += H[(size_t)i * n + j] * y[j];
                hy[i] = -v;  // H (-y)
            }
            const double yhy = -dot(y, hy);
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    H[(size_t)i * n + j] +=
                        ((sy + yhy) * s[i] * s[j]) / (sy * sy) -
                        (hy[i] * s[j] + s[i] * hy[j]) / sy;
                }
            }
        }
    }
    res.f = f;
    res.grad_norm = inf_norm(grad);
    if (res.grad_norm <= opts.gtol * std::max(1.0, std::fabs(f))) res.converged = true;
    return res;
}

}  // namespace copred
