#include "copred/dr.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace copred {

namespace {

constexpr double kFrechetPad = 1e-9;

void validate_counts(const std::array<double, 4>& counts) {
    double total = 0.0;
    for (double c : counts) {
        if (!(c >= 0.0)) throw std::invalid_argument("quadrant counts must be nonnegative");
        total += c;
    }
    if (!(total >= 1.0)) throw std::invalid_argument("quadrant counts must sum to at least one");
}

// FOC of the multinomial likelihood in C; strictly decreasing on the open
// Frechet interval. Cell lengths are floored at +0 so that a probe sitting
// numerically on a Frechet bound blows up with the correct sign instead of
// crossing into a negative length by rounding.
double foc_c(const GridPoint& u, const std::array<double, 4>& counts, double c) {
    double g = 0.0;
    if (counts[0] != 0.0) g += counts[0] / std::max(c, 0.0);
    if (counts[1] != 0.0) g -= counts[1] / std::max(u.u1 - c, 0.0);
    if (counts[2] != 0.0) g -= counts[2] / std::max(u.u2 - c, 0.0);
    if (counts[3] != 0.0) g += counts[3] / std::max(1.0 - u.u1 - u.u2 + c, 0.0);
    return g;
}

double foc_c_deriv(const GridPoint& u, const std::array<double, 4>& counts, double c) {
    const double p1 = c;
    const double p2 = u.u1 - c;
    const double p3 = u.u2 - c;
    const double p4 = 1.0 - u.u1 - u.u2 + c;
    return -(counts[0] / (p1 * p1) + counts[1] / (p2 * p2) + counts[2] / (p3 * p3) +
             counts[3] / (p4 * p4));
}

// Maximizer of the likelihood in C, truncated just inside the Frechet
// interval when the FOC has no interior root.
double solve_c(const GridPoint& u, const std::array<double, 4>& counts, bool& boundary) {
    const double lo = std::max(0.0, u.u1 + u.u2 - 1.0);
    const double hi = std::min(u.u1, u.u2);
    const double a = lo + kFrechetPad;
    const double b = hi - kFrechetPad;
    if (!(a < b)) throw std::domain_error("degenerate Frechet interval");

    if (foc_c(u, counts, a) <= 0.0) {
        boundary = true;
        return a;
    }
    if (foc_c(u, counts, b) >= 0.0) {
        boundary = true;
        return b;
    }
    double x0 = a, x1 = b;
    while (x1 - x0 > 1e-12) {
        const double mid = 0.5 * (x0 + x1);
        if (foc_c(u, counts, mid) > 0.0)
            x0 = mid;
        else
            x1 = mid;
    }
    double c = 0.5 * (x0 + x1);
    for (int it = 0; it < 6; ++it) {
        const double g = foc_c(u, counts, c);
        const double gp = foc_c_deriv(u, counts, c);
        const double step = g / gp;
        const double next = c - step;
        if (!(next > lo && next < hi)) break;
        c = next;
        if (std::fabs(step) < 1e-16) break;
    }
    return c;
}

}  // namespace

double invert_copula_rho(const GridPoint& u, double c, double rho_lo, double rho_hi) {
    validate_grid_point(u);
    double cl = copula_value(u, rho_lo);
    double ch = copula_value(u, rho_hi);
    if (!(c >= cl && c <= ch)) {
        throw std::invalid_argument("copula value outside the bracket range");
    }
    double lo = rho_lo, hi = rho_hi;
    double rho = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double val = copula_value(u, rho) - c;
        if (val > 0.0)
            hi = rho;
        else
            lo = rho;
        const double dens = copula_drho(u, rho);
        double next = rho - val / dens;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        const double move = std::fabs(next - rho);
        rho = next;
        if (move <= 1e-10 && hi - lo <= 1e-9) break;
    }
    return rho;
}

double restricted_loglik(const GridPoint& u, double alpha,
                         const std::array<double, 4>& counts) {
    const auto q = quadrant_probs(u, std::tanh(alpha));
    double ll = 0.0;
    for (int j = 0; j < 4; ++j) {
        if (counts[j] != 0.0) ll += counts[j] * std::log(q.p[j]);
    }
    return ll;
}

RestrictedFit fit_alpha(const GridPoint& u, const std::array<double, 4>& counts) {
    validate_grid_point(u);
    validate_counts(counts);
    RestrictedFit fit;

    // The alpha derivative of the likelihood is tau * foc_c at the implied
    // copula value, tau > 0, and it crosses zero at most once from above.
    // If it is still ascending at the clamp the fit sits on the boundary;
    // otherwise the interior root exists and is bracketed by [-A, A].
    const double rho_max = std::tanh(kAlphaMax);
    const double ch = copula_value(u, rho_max);
    const double cl = copula_value(u, -rho_max);
    if (foc_c(u, counts, ch) >= 0.0) {
        fit.alpha_hat = kAlphaMax;
        fit.boundary_flag = true;
    } else if (foc_c(u, counts, cl) <= 0.0) {
        fit.alpha_hat = -kAlphaMax;
        fit.boundary_flag = true;
    } else {
        // seed from the C-space solve, which is unconditionally stable,
        // then settle the root on the link scale where the tolerance is
        // not distorted by a tiny dC/drho near the Frechet bounds
        bool truncated = false;
        double c = solve_c(u, counts, truncated);
        c = std::clamp(c, std::nextafter(cl, 1.0), std::nextafter(ch, 0.0));
        double alpha = std::atanh(invert_copula_rho(u, c, -rho_max, rho_max));
        double lo = -kAlphaMax, hi = kAlphaMax;
        for (int it = 0; it < 140; ++it) {
            const double cc = copula_value(u, std::tanh(alpha));
            const double d1 = link_tau(u, alpha) * foc_c(u, counts, cc);
            if (d1 > 0.0)
                lo = alpha;
            else
                hi = alpha;
            const double d2 = loglik_hess_alpha(u, alpha, counts);
            double next = (std::isfinite(d1) && d2 < 0.0) ? alpha - d1 / d2
                                                          : 0.5 * (lo + hi);
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            const double move = std::fabs(next - alpha);
            alpha = next;
            if (move <= 1e-13 || hi - lo <= 1e-11) break;
        }
        fit.alpha_hat = alpha;
    }
    fit.rho_hat = std::tanh(fit.alpha_hat);
    fit.c_hat = copula_value(u, fit.rho_hat);
    return fit;
}

RestrictedFit fit_alpha_newton(const GridPoint& u, const std::array<double, 4>& counts) {
    validate_grid_point(u);
    validate_counts(counts);

    // d loglik / d alpha = tau(u, alpha) * foc_c at the implied C; the sign
    // is decreasing in alpha, so a bracketed Newton on the derivative is
    // globally safe.
    auto deriv = [&](double alpha) {
        const double rho = std::tanh(alpha);
        const double c = copula_value(u, rho);
        return link_tau(u, alpha) * foc_c(u, counts, c);
    };

    RestrictedFit fit;
    double lo = -kAlphaMax, hi = kAlphaMax;
    if (deriv(lo) <= 0.0) {
        fit.alpha_hat = lo;
        fit.boundary_flag = true;
    } else if (deriv(hi) >= 0.0) {
        fit.alpha_hat = hi;
        fit.boundary_flag = true;
    } else {
        double alpha = 0.0;
        if (deriv(alpha) > 0.0)
            lo = alpha;
        else
            hi = alpha;
        for (int it = 0; it < 200; ++it) {
            const double d1 = deriv(alpha);
            if (d1 > 0.0)
                lo = alpha;
            else
                hi = alpha;
            const double d2 = loglik_hess_alpha(u, alpha, counts);
            double next = (d2 < 0.0) ? alpha - d1 / d2 : 0.5 * (lo + hi);
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            const double move = std::fabs(next - alpha);
            alpha = next;
            if (move <= 1e-11 && hi - lo <= 1e-9) break;
        }
        fit.alpha_hat = alpha;
    }
    fit.rho_hat = std::tanh(fit.alpha_hat);
    fit.c_hat = copula_value(u, fit.rho_hat);
    return fit;
}

}  // namespace copred
