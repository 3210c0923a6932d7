#include "copred/marginal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "copred/optim.hpp"
#include "copred/rng.hpp"

namespace copred {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

// Index map between the packed unconstrained vector and the natural
// parameters actually present under a model spec.
struct Layout {
    bool ar, exog, gjr;
    int n_mean;   // mu + optional phi, gamma
    int n_total;  // plus omega, arch, optional gjr, garch

    explicit Layout(const MarginalModelSpec& spec)
        : ar(spec.ar), exog(spec.exog), gjr(spec.gjr) {
        n_mean = 1 + (ar ? 1 : 0) + (exog ? 1 : 0);
        n_total = n_mean + 3 + (gjr ? 1 : 0);
    }

    MarginalParams unpack_natural(const std::vector<double>& v) const {
        MarginalParams p;
        int i = 0;
        p.mu = v[i++];
        if (ar) p.phi = v[i++];
        if (exog) p.gamma = v[i++];
        p.omega = v[i++];
        p.arch = v[i++];
        if (gjr) p.gjr = v[i++];
        p.garch = v[i++];
        return p;
    }

    std::vector<double> pack_natural(const MarginalParams& p) const {
        std::vector<double> v;
        v.reserve(n_total);
        v.push_back(p.mu);
        if (ar) v.push_back(p.phi);
        if (exog) v.push_back(p.gamma);
        v.push_back(p.omega);
        v.push_back(p.arch);
        if (gjr) v.push_back(p.gjr);
        v.push_back(p.garch);
        return v;
    }
};

double clamp_exp(double x) { return std::exp(std::clamp(x, -40.0, 40.0)); }

// Inverts -H (symmetrized) by Gauss-Jordan; false when singular.
bool invert_negated(const std::vector<double>& hess, int p, std::vector<double>& inv) {
    std::vector<double> m((size_t)p * 2 * p, 0.0);
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) {
            m[(size_t)i * 2 * p + j] = -0.5 * (hess[(size_t)i * p + j] + hess[(size_t)j * p + i]);
        }
        m[(size_t)i * 2 * p + p + i] = 1.0;
    }
    for (int c = 0; c < p; ++c) {
        int piv = c;
        for (int r = c + 1; r < p; ++r)
            if (std::fabs(m[(size_t)r * 2 * p + c]) > std::fabs(m[(size_t)piv * 2 * p + c])) piv = r;
        if (std::fabs(m[(size_t)piv * 2 * p + c]) < 1e-14) return false;
        for (int cc = 0; cc < 2 * p; ++cc) std::swap(m[(size_t)c * 2 * p + cc], m[(size_t)piv * 2 * p + cc]);
        const double d = m[(size_t)c * 2 * p + c];
        for (int cc = 0; cc < 2 * p; ++cc) m[(size_t)c * 2 * p + cc] /= d;
        for (int r = 0; r < p; ++r) {
            if (r == c) continue;
            const double f = m[(size_t)r * 2 * p + c];
            for (int cc = 0; cc < 2 * p; ++cc) m[(size_t)r * 2 * p + cc] -= f * m[(size_t)c * 2 * p + cc];
        }
    }
    inv.assign((size_t)p * p, 0.0);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) inv[(size_t)i * p + j] = m[(size_t)i * 2 * p + p + j];
    return true;
}

// unconstrained -> natural: omega = exp(w); (arch, gjr/2, garch) are a
// softmax share of a unit budget, which enforces positivity and
// arch + garch + gjr/2 < 1
std::vector<double> to_natural(const Layout& lay, const std::vector<double>& u) {
    std::vector<double> v(u);
    int i = lay.n_mean;
    v[i] = clamp_exp(u[i]);  // omega
    const double ea = clamp_exp(u[i + 1]);
    const double eg = lay.gjr ? clamp_exp(u[i + 2]) : 0.0;
    const double eb = clamp_exp(u[lay.n_total - 1]);
    const double d = 1.0 + ea + eg + eb;
    v[i + 1] = ea / d;
    if (lay.gjr) v[i + 2] = 2.0 * eg / d;
    v[lay.n_total - 1] = eb / d;
    return v;
}

std::vector<double> to_unconstrained(const Layout& lay, const std::vector<double>& nat) {
    std::vector<double> u(nat);
    int i = lay.n_mean;
    const double omega = std::max(nat[i], 1e-12);
    const double a = std::max(nat[i + 1], 1e-8);
    const double g2 = lay.gjr ? std::max(nat[i + 2] / 2.0, 1e-8) : 0.0;
    const double b = std::max(nat[lay.n_total - 1], 1e-8);
    const double slack = std::max(1.0 - a - g2 - b, 1e-8);
    u[i] = std::log(omega);
    u[i + 1] = std::log(a / slack);
    if (lay.gjr) u[i + 2] = std::log(g2 / slack);
    u[lay.n_total - 1] = std::log(b / slack);
    return u;
}

// Log-likelihood and its gradient with respect to the natural parameters.
// Returns -inf when the variance recursion degenerates.
double loglik_natural(const Layout& lay, const std::vector<double>& nat,
                      const std::vector<double>& y, const std::vector<double>& z,
                      double ybar, std::vector<double>* grad_out,
                      FilterOutput* filter_out) {
    const int n = (int)y.size();
    const MarginalParams p = lay.unpack_natural(nat);
    const int P = lay.n_total;

    // mean residuals and their derivatives are direct; variance derivatives
    // follow the recursion
    std::vector<double> eta(n);
    double eta_sum = 0.0;
    for (int t = 0; t < n; ++t) {
        const double ylag = t == 0 ? ybar : y[t - 1];
        double m = p.mu;
        if (lay.ar) m += p.phi * ylag;
        if (lay.exog) m += p.gamma * z[t];
        eta[t] = y[t] - m;
        eta_sum += eta[t];
    }
    const double etabar = eta_sum / n;
    double v = 0.0;
    for (int t = 0; t < n; ++t) v += (eta[t] - etabar) * (eta[t] - etabar);
    v /= n;
    if (!(v > 1e-300)) return -HUGE_VAL;

    // derivative of v with respect to the mean parameters
    // (d eta / d mu = -1 is constant, so it drops out of the centered sum)
    std::vector<double> dv(P, 0.0);
    {
        int i = 1;
        if (lay.ar) {
            double s = 0.0;
            for (int t = 0; t < n; ++t) {
                const double ylag = t == 0 ? ybar : y[t - 1];
                s += (eta[t] - etabar) * ylag;
            }
            dv[i++] = -2.0 * s / n;
        }
        if (lay.exog) {
            double s = 0.0;
            for (int t = 0; t < n; ++t) s += (eta[t] - etabar) * z[t];
            dv[i] = -2.0 * s / n;
        }
    }

    const int iw = lay.n_mean;
    const int ia = iw + 1;
    const int ig = lay.gjr ? iw + 2 : -1;
    const int ib = P - 1;

    std::vector<double> sigma2(n);
    std::vector<double> dsig(P), dsig_prev(P);
    std::vector<double> grad(P, 0.0);
    double ll = 0.0;

    for (int t = 0; t < n; ++t) {
        double deta_mu = -1.0;
        double deta_phi = 0.0, deta_gamma = 0.0;
        const double ylag = t == 0 ? ybar : y[t - 1];
        if (lay.ar) deta_phi = -ylag;
        if (lay.exog) deta_gamma = -z[t];

        if (t == 0) {
            sigma2[0] = v;
            dsig = dv;
        } else {
            const double e = eta[t - 1];
            const bool neg = e < 0.0;
            sigma2[t] = p.omega + p.arch * e * e + (lay.gjr && neg ? p.gjr * e * e : 0.0) +
                        p.garch * sigma2[t - 1];
            // previous eta derivatives
            const double ylag_prev = t == 1 ? ybar : y[t - 2];
            const double de_mu = -1.0;
            const double de_phi = lay.ar ? -ylag_prev : 0.0;
            const double de_gamma = lay.exog ? -z[t - 1] : 0.0;
            const double arch_eff = p.arch + (lay.gjr && neg ? p.gjr : 0.0);
            for (int j = 0; j < P; ++j) dsig[j] = p.garch * dsig_prev[j];
            {
                int i = 0;
                dsig[i++] += arch_eff * 2.0 * e * de_mu;
                if (lay.ar) dsig[i++] += arch_eff * 2.0 * e * de_phi;
                if (lay.exog) dsig[i++] += arch_eff * 2.0 * e * de_gamma;
            }
            dsig[iw] += 1.0;
            dsig[ia] += e * e;
            if (lay.gjr) dsig[ig] += neg ? e * e : 0.0;
            dsig[ib] += sigma2[t - 1];
        }
        if (!(sigma2[t] > 1e-300)) return -HUGE_VAL;

        const double s2 = sigma2[t];
        const double e2 = eta[t] * eta[t];
        ll -= 0.5 * (kLog2Pi + std::log(s2) + e2 / s2);

        const double wsig = -0.5 * (1.0 / s2 - e2 / (s2 * s2));
        const double weta = -eta[t] / s2;
        for (int j = 0; j < P; ++j) grad[j] += wsig * dsig[j];
        {
            int i = 0;
            grad[i++] += weta * deta_mu;
            if (lay.ar) grad[i++] += weta * deta_phi;
            if (lay.exog) grad[i] += weta * deta_gamma;
        }
        std::swap(dsig, dsig_prev);
    }

    if (grad_out) *grad_out = grad;
    if (filter_out) {
        filter_out->eta = std::move(eta);
        filter_out->sigma2 = sigma2;
        filter_out->eps.resize(n);
        for (int t = 0; t < n; ++t) {
            filter_out->eps[t] = filter_out->eta[t] / std::sqrt(sigma2[t]);
        }
        filter_out->loglik = ll;
    }
    return ll;
}

// Chain rule from the natural gradient to the unconstrained scale.
void chain_to_unconstrained(const Layout& lay, const std::vector<double>& nat,
                            const std::vector<double>& gnat, std::vector<double>& gu) {
    const int iw = lay.n_mean;
    const int ia = iw + 1;
    const int ig = lay.gjr ? iw + 2 : -1;
    const int ib = lay.n_total - 1;
    for (int j = 0; j < lay.n_mean; ++j) gu[j] = gnat[j];
    gu[iw] = gnat[iw] * nat[iw];
    const double a = nat[ia];
    const double g2 = lay.gjr ? nat[ig] / 2.0 : 0.0;
    const double b = nat[ib];
    const double ga = gnat[ia];
    const double gg2 = lay.gjr ? 2.0 * gnat[ig] : 0.0;  // d/d(g2) = 2 d/d(gjr)
    const double gb = gnat[ib];
    gu[ia] = ga * a * (1.0 - a) - gg2 * g2 * a - gb * b * a;
    if (lay.gjr) gu[ig] = -ga * a * g2 + gg2 * g2 * (1.0 - g2) - gb * b * g2;
    gu[ib] = -ga * a * b - gg2 * g2 * b + gb * b * (1.0 - b);
}

// Ordinary least squares start for the mean equation.
MarginalParams moment_start(const Layout& lay, const std::vector<double>& y,
                            const std::vector<double>& z, double ybar) {
    const int n = (int)y.size();
    const int k = lay.n_mean;
    // normal equations X'X beta = X'y with X = [1, ylag?, z?]
    double xtx[3][3] = {{0}};
    double xty[3] = {0};
    for (int t = 1; t < n; ++t) {
        double row[3];
        int i = 0;
        row[i++] = 1.0;
        if (lay.ar) row[i++] = y[t - 1];
        if (lay.exog) row[i++] = z[t];
        for (int a = 0; a < k; ++a) {
            for (int b = 0; b < k; ++b) xtx[a][b] += row[a] * row[b];
            xty[a] += row[a] * y[t];
        }
    }
    // Gaussian elimination on the tiny system
    double beta[3] = {ybar, 0.0, 0.0};
    {
        double m[3][4];
        for (int a = 0; a < k; ++a) {
            for (int b = 0; b < k; ++b) m[a][b] = xtx[a][b];
            m[a][k] = xty[a];
        }
        bool ok = true;
        for (int c = 0; c < k && ok; ++c) {
            int piv = c;
            for (int r = c + 1; r < k; ++r)
                if (std::fabs(m[r][c]) > std::fabs(m[piv][c])) piv = r;
            if (std::fabs(m[piv][c]) < 1e-12) {
                ok = false;
                break;
            }
            std::swap(m[c], m[piv]);
            for (int r = 0; r < k; ++r) {
                if (r == c) continue;
                const double f = m[r][c] / m[c][c];
                for (int cc = c; cc <= k; ++cc) m[r][cc] -= f * m[c][cc];
            }
        }
        if (ok) {
            for (int c = 0; c < k; ++c) beta[c] = m[c][k] / m[c][c];
        }
    }

    MarginalParams p;
    int i = 0;
    p.mu = beta[i++];
    if (lay.ar) p.phi = std::clamp(beta[i++], -0.95, 0.95);
    if (lay.exog) p.gamma = beta[i++];

    double v = 0.0;
    for (int t = 0; t < n; ++t) {
        const double ylag = t == 0 ? ybar : y[t - 1];
        double m = p.mu;
        if (lay.ar) m += p.phi * ylag;
        if (lay.exog) m += p.gamma * z[t];
        v += (y[t] - m) * (y[t] - m);
    }
    v = std::max(v / n, 1e-12);

    p.arch = 0.05;
    p.gjr = lay.gjr ? 0.05 : 0.0;
    p.garch = 0.90;
    p.omega = v * (1.0 - p.arch - p.garch - p.gjr / 2.0);
    return p;
}

}  // namespace

FilterOutput marginal_filter(const MarginalModelSpec& spec, const MarginalParams& params,
                             const std::vector<double>& y, const std::vector<double>& z) {
    if (spec.exog && z.size() != y.size()) {
        throw std::invalid_argument("state series must match the sample length");
    }
    const Layout lay(spec);
    const double ybar = std::accumulate(y.begin(), y.end(), 0.0) / (double)y.size();
    FilterOutput out;
    const double ll =
        loglik_natural(lay, lay.pack_natural(params), y, z, ybar, nullptr, &out);
    if (ll == -HUGE_VAL) {
        throw std::invalid_argument("degenerate variance recursion");
    }
    return out;
}

double ar1_coefficient(const std::vector<double>& z) {
    const int n = (int)z.size();
    if (n < 3) throw std::invalid_argument("series too short for an AR(1) fit");
    const double zbar = std::accumulate(z.begin(), z.end(), 0.0) / n;
    double num = 0.0, den = 0.0;
    for (int t = 1; t < n; ++t) {
        num += (z[t] - zbar) * (z[t - 1] - zbar);
        den += (z[t - 1] - zbar) * (z[t - 1] - zbar);
    }
    if (den <= 0.0) return 0.0;
    return num / den;
}

MarginalFit fit_marginal(const std::vector<double>& y, const std::vector<double>& z,
                         const MarginalModelSpec& spec, const FitOptions& options) {
    const int n = (int)y.size();
    if (n < 20) throw std::invalid_argument("sample too short to fit a marginal model");
    if (spec.exog && z.size() != y.size()) {
        throw std::invalid_argument("state series must match the sample length");
    }
    const Layout lay(spec);
    const double ybar = std::accumulate(y.begin(), y.end(), 0.0) / n;

    // objective on the unconstrained scale, averaged per observation
    Objective objective = [&](const std::vector<double>& u, std::vector<double>& grad) {
        const std::vector<double> nat = to_natural(lay, u);
        std::vector<double> gnat;
        const double ll = loglik_natural(lay, nat, y, z, ybar, &gnat, nullptr);
        if (ll == -HUGE_VAL) {
            std::fill(grad.begin(), grad.end(), 0.0);
            return -HUGE_VAL;
        }
        chain_to_unconstrained(lay, nat, gnat, grad);
        for (double& g : grad) g /= n;
        return ll / n;
    };

    // start list: optional warm start, moment start, seeded random restarts
    std::vector<MarginalParams> starts;
    if (options.warm_start) starts.push_back(*options.warm_start);
    const MarginalParams base = moment_start(lay, y, z, ybar);
    starts.push_back(base);
    Rng rng(options.seed);
    for (int r = 0; r < options.restarts; ++r) {
        MarginalParams p = base;
        p.arch = 0.02 + 0.18 * rng.uniform();
        p.garch = 0.55 + 0.40 * rng.uniform();
        if (lay.gjr) p.gjr = 0.02 + 0.12 * rng.uniform();
        const double pers = p.arch + p.garch + p.gjr / 2.0;
        if (pers > 0.985) p.garch -= pers - 0.985;
        const double v = base.omega / (1.0 - base.arch - base.garch - base.gjr / 2.0);
        p.omega = std::max(v * (1.0 - p.arch - p.garch - p.gjr / 2.0), 1e-12);
        p.mu = base.mu * (0.5 + rng.uniform());
        if (lay.ar) p.phi = std::clamp(base.phi + 0.3 * (rng.uniform() - 0.5), -0.95, 0.95);
        if (lay.exog) p.gamma = base.gamma * (0.5 + rng.uniform());
        starts.push_back(p);
    }

    OptimOptions oopts;
    oopts.max_iter = options.max_iter;
    oopts.gtol = options.gtol;

    OptimResult best;
    best.f = -HUGE_VAL;
    bool best_converged = false;
    for (const auto& start : starts) {
        OptimResult res = bfgs_maximize(objective, to_unconstrained(lay, lay.pack_natural(start)), oopts);
        const bool better = (res.converged && !best_converged) ||
                            (res.converged == best_converged && res.f > best.f);
        if (better) {
            best = std::move(res);
            best_converged = best.converged;
        }
    }

    MarginalFit fit;
    fit.spec = spec;
    if (best.f == -HUGE_VAL) {
        throw ConvergenceError("marginal QML failed from every start", fit);
    }
    const std::vector<double> nat = to_natural(lay, best.x);
    fit.params = lay.unpack_natural(nat);
    FilterOutput filt;
    loglik_natural(lay, nat, y, z, ybar, nullptr, &filt);
    fit.residuals = std::move(filt.eps);
    fit.sigma2 = std::move(filt.sigma2);
    fit.loglik = filt.loglik;
    fit.grad_norm = best.grad_norm;
    fit.iterations = best.iterations;
    fit.converged = best_converged;

    // asymptotic standard errors: difference the analytic gradient on the
    // well-scaled unconstrained axes, then delta method through the
    // transform Jacobian back to the natural scale
    {
        const int P = lay.n_total;
        std::vector<double> hess((size_t)P * P, 0.0);
        std::vector<double> gp(P), gm(P);
        std::vector<double> probe = best.x;
        bool ok = true;
        for (int j = 0; j < P && ok; ++j) {
            const double h = 1e-4;
            probe[j] = best.x[j] + h;
            ok &= std::isfinite(objective(probe, gp));
            probe[j] = best.x[j] - h;
            ok &= std::isfinite(objective(probe, gm));
            probe[j] = best.x[j];
            if (!ok) break;
            // objective is averaged; scale back to the full likelihood
            for (int i = 0; i < P; ++i) hess[(size_t)i * P + j] = n * (gp[i] - gm[i]) / (2.0 * h);
        }
        std::vector<double> cov_u;
        if (ok) ok = invert_negated(hess, P, cov_u);
        if (ok) {
            // Jacobian dnat/du at the optimum
            std::vector<double> jac((size_t)P * P, 0.0);
            for (int i = 0; i < lay.n_mean; ++i) jac[(size_t)i * P + i] = 1.0;
            const int iw = lay.n_mean;
            const int ia = iw + 1;
            const int ig = lay.gjr ? iw + 2 : -1;
            const int ib = P - 1;
            const double a = nat[ia];
            const double g2 = lay.gjr ? nat[ig] / 2.0 : 0.0;
            const double b = nat[ib];
            jac[(size_t)iw * P + iw] = nat[iw];
            jac[(size_t)ia * P + ia] = a * (1.0 - a);
            jac[(size_t)ia * P + ib] = -a * b;
            jac[(size_t)ib * P + ia] = -b * a;
            jac[(size_t)ib * P + ib] = b * (1.0 - b);
            if (lay.gjr) {
                jac[(size_t)ia * P + ig] = -a * g2;
                jac[(size_t)ig * P + ia] = -2.0 * g2 * a;
                jac[(size_t)ig * P + ig] = 2.0 * g2 * (1.0 - g2);
                jac[(size_t)ig * P + ib] = -2.0 * g2 * b;
                jac[(size_t)ib * P + ig] = -b * g2;
            }
            fit.std_errors.resize(P);
            for (int i = 0; i < P; ++i) {
                double var = 0.0;
                for (int r = 0; r < P; ++r) {
                    for (int c = 0; c < P; ++c) {
                        var += jac[(size_t)i * P + r] * cov_u[(size_t)r * P + c] * jac[(size_t)i * P + c];
                    }
                }
                fit.std_errors[i] = var > 0.0 ? std::sqrt(var) : std::nan("");
            }
        }
    }

    if (!fit.converged) {
        throw ConvergenceError("marginal QML did not converge", fit);
    }
    if (lay.ar && std::fabs(fit.params.phi) >= 1.0) {
        throw std::invalid_argument("non-stationary mean recursion at the optimum");
    }
    return fit;
}

}  // namespace copred
