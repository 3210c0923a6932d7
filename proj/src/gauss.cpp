#include "copred/gauss.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace copred {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Gauss-Legendre abscissae/weights on [-1,1], folded to positive points.
constexpr double kGlX6[3] = {0.9324695142031522, 0.6612093864662647,
                             0.2386191860831970};
constexpr double kGlW6[3] = {0.1713244923791705, 0.3607615730481384,
                             0.4679139345726904};
constexpr double kGlX12[6] = {0.9815606342467191, 0.9041172563704750,
                              0.7699026741943050, 0.5873179542866171,
                              0.3678314989981802, 0.1252334085114692};
constexpr double kGlW12[6] = {0.04717533638651177, 0.1069393259953183,
                              0.1600783285433464,  0.2031674267230659,
                              0.2334925365383547,  0.2491470458134029};
constexpr double kGlX20[10] = {0.9931285991850949,  0.9639719272779138,
                               0.9122344282513259,  0.8391169718222188,
                               0.7463319064601508,  0.6360536807265150,
                               0.5108670019508271,  0.3737060887154196,
                               0.2277858511416451,  0.07652652113349733};
constexpr double kGlW20[10] = {0.01761400713915212, 0.04060142980038694,
                               0.06267204833410906, 0.08327674157670475,
                               0.1019301198172404,  0.1181945319615184,
                               0.1316886384491766,  0.1420961093183821,
                               0.1491729864726037,  0.1527533871307259};

// P(X > dh, Y > dk) for a standard bivariate normal pair with correlation r.
// Port of Genz's hybrid of the Drezner-Wesolowsky single integral (moderate
// correlations) and the expansion near |r| = 1.
double bvn_upper(double dh, double dk, double r) {
    const double* x;
    const double* w;
    int ng;
    const double ar = std::fabs(r);
    if (ar < 0.3) {
        ng = 3;
        x = kGlX6;
        w = kGlW6;
    } else if (ar < 0.75) {
        ng = 6;
        x = kGlX12;
        w = kGlW12;
    } else {
        ng = 10;
        x = kGlX20;
        w = kGlW20;
    }

    double h = dh;
    double k = dk;
    double hk = h * k;
    double bvn = 0.0;
    if (ar < 0.925) {
        if (ar > 0.0) {
            const double hs = (h * h + k * k) / 2.0;
            const double asr = std::asin(r);
            for (int i = 0; i < ng; ++i) {
                for (int is = -1; is <= 1; is += 2) {
                    const double sn = std::sin(asr * (is * x[i] + 1.0) / 2.0);
                    bvn += w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
                }
            }
            bvn = bvn * asr / (2.0 * kTwoPi);
        }
        bvn += norm_cdf(-h) * norm_cdf(-k);
        return bvn;
    }

    if (r < 0.0) {
        k = -k;
        hk = -hk;
    }
    if (ar < 1.0) {
        const double as = (1.0 - r) * (1.0 + r);
        double a = std::sqrt(as);
        const double bs = (h - k) * (h - k);
        const double c = (4.0 - hk) / 8.0;
        const double d = (12.0 - hk) / 16.0;
        double asr = -(bs / as + hk) / 2.0;
        if (asr > -100.0) {
            bvn = a * std::exp(asr) *
                  (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 +
                   c * d * as * as / 5.0);
        }
        if (-hk < 100.0) {
            const double b = std::sqrt(bs);
            const double sp = std::sqrt(kTwoPi) * norm_cdf(-b / a);
            bvn -= std::exp(-hk / 2.0) * sp * b *
                   (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
        }
        a /= 2.0;
        for (int i = 0; i < ng; ++i) {
            for (int is = -1; is <= 1; is += 2) {
                const double xs = std::pow(a * (is * x[i] + 1.0), 2);
                const double rs = std::sqrt(1.0 - xs);
                asr = -(bs / xs + hk) / 2.0;
                if (asr > -100.0) {
                    const double sp = 1.0 + c * xs * (1.0 + d * xs);
                    const double ep =
                        std::exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs;
                    bvn += a * w[i] * std::exp(asr) * (ep - sp);
                }
            }
        }
        bvn = -bvn / kTwoPi;
    }
    if (r > 0.0) {
        bvn += norm_cdf(-std::max(h, k));
    } else {
        bvn = -bvn;
        if (k > h) bvn += norm_cdf(k) - norm_cdf(h);
    }
    return bvn;
}

// Frechet bounds for a copula value at u.
double frechet_low(const GridPoint& u) {
    return std::max(0.0, u.u1 + u.u2 - 1.0);
}
double frechet_high(const GridPoint& u) { return std::min(u.u1, u.u2); }

}  // namespace

void validate_grid_point(const GridPoint& u) {
    if (!(u.u1 > 0.0 && u.u1 < 1.0 && u.u2 > 0.0 && u.u2 < 1.0)) {
        throw std::domain_error("grid point must lie strictly inside (0,1)^2");
    }
}

double norm_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(kTwoPi);
}

double norm_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::domain_error("norm_quantile requires p in (0,1)");
    }
    // Wichura's PPND16: three rational approximations, |error| ~ 1e-16.
    const double q = p - 0.5;
    double r;
    if (std::fabs(q) <= 0.425) {
        r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                     6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                   1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
                 1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
               (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                     3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                   5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
                 4.2313330701600911252e1) * r + 1.0);
    }
    r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                    2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                  3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
                4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
              (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                    1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                  6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
                2.05319162663775882187e0) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                    1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                  2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
                5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
              (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-9) * r +
                    1.84631831751005468180e-6) * r + 7.86869131145613259100e-4) * r +
                  1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                5.99832206555887937690e-1) * r + 1.0);
    }
    return q < 0.0 ? -val : val;
}

double bvn_cdf(double z1, double z2, double rho) {
    if (!(rho >= -1.0 && rho <= 1.0)) {
        throw std::domain_error("bvn_cdf requires |rho| <= 1");
    }
    if (rho == 1.0) return norm_cdf(std::min(z1, z2));
    if (rho == -1.0) return std::max(0.0, norm_cdf(z1) + norm_cdf(z2) - 1.0);
    return bvn_upper(-z1, -z2, rho);
}

double copula_value(const GridPoint& u, double rho) {
    validate_grid_point(u);
    rho = std::clamp(rho, -kRhoClamp, kRhoClamp);
    const double c = bvn_cdf(norm_quantile(u.u1), norm_quantile(u.u2), rho);
    // quadrature round-off must not escape the Frechet interval
    return std::clamp(c, frechet_low(u), frechet_high(u));
}

QuadrantProbs quadrant_probs(const GridPoint& u, double rho) {
    const double c = copula_value(u, rho);
    QuadrantProbs out;
    out.p = {c, u.u1 - c, u.u2 - c, 1.0 - u.u1 - u.u2 + c};
    for (double& pj : out.p) {
        if (pj < kProbFloor) {
            pj = kProbFloor;
            out.floored = true;
        }
    }
    return out;
}

double copula_drho(const GridPoint& u, double rho) {
    validate_grid_point(u);
    rho = std::clamp(rho, -kRhoClamp, kRhoClamp);
    const double z1 = norm_quantile(u.u1);
    const double z2 = norm_quantile(u.u2);
    const double det = 1.0 - rho * rho;
    const double quad = (z1 * z1 - 2.0 * rho * z1 * z2 + z2 * z2) / det;
    return std::exp(-0.5 * quad) / (kTwoPi * std::sqrt(det));
}

double copula_ddrho(const GridPoint& u, double rho) {
    validate_grid_point(u);
    rho = std::clamp(rho, -kRhoClamp, kRhoClamp);
    const double z1 = norm_quantile(u.u1);
    const double z2 = norm_quantile(u.u2);
    const double det = 1.0 - rho * rho;
    const double num = z1 * z2 + (1.0 - z1 * z1 - z2 * z2) * rho +
                       z1 * z2 * rho * rho - rho * rho * rho;
    return copula_drho(u, rho) * num / (det * det);
}

double link_tau(const GridPoint& u, double alpha) {
    const double rho = std::tanh(alpha);
    return (1.0 - rho * rho) * copula_drho(u, rho);
}

double loglik_hess_alpha(const GridPoint& u, double alpha,
                         const std::array<double, 4>& counts) {
    const double rho = std::tanh(alpha);
    const double det = 1.0 - rho * rho;
    const QuadrantProbs probs = quadrant_probs(u, rho);
    const double crho = copula_drho(u, rho);
    const double cddrho = copula_ddrho(u, rho);
    double hess = 0.0;
    for (int j = 0; j < 4; ++j) {
        const double pj = probs.p[j];
        const double ej = kQuadrantSigns[j];
        hess += counts[j] *
                (det * det * (ej * cddrho / pj - crho * crho / (pj * pj)) -
                 2.0 * rho * det * ej * crho / pj);
    }
    return hess;
}

}  // namespace copred
