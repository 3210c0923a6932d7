#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "copred/marginal.hpp"
#include "copred/rng.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace copred;

namespace {

struct SimPath {
    std::vector<double> y;
};

// AR(1)-GARCH(1,1) with Gaussian innovations, 500-step burn-in.
SimPath simulate_ar_garch(const MarginalParams& p, int n, Rng& rng) {
    const int burn = 500;
    SimPath out;
    out.y.resize(n);
    double ylag = 0.0;
    double sig2 = p.omega / (1.0 - p.arch - p.garch);
    double eta_lag = 0.0;
    for (int t = -burn; t < n; ++t) {
        sig2 = (t == -burn) ? sig2
                            : p.omega + p.arch * eta_lag * eta_lag + p.garch * sig2;
        const double eta = std::sqrt(sig2) * rng.normal();
        const double y = p.mu + p.phi * ylag + eta;
        if (t >= 0) out.y[t] = y;
        ylag = y;
        eta_lag = eta;
    }
    return out;
}

double mean_of(const std::vector<double>& x) {
    return std::accumulate(x.begin(), x.end(), 0.0) / (double)x.size();
}

double variance_of(const std::vector<double>& x) {
    const double m = mean_of(x);
    double v = 0.0;
    for (double e : x) v += (e - m) * (e - m);
    return v / (double)x.size();
}

}  // namespace

TEST_SUITE("marginal") {

TEST_CASE("variance recursion settles at its fixed point") {
    std::vector<double> y{2.0, -1.5, 1.0, -0.5, 3.0};
    y.resize(405, 0.0);
    MarginalParams p;
    p.mu = 0.0;
    p.phi = 0.0;
    p.omega = 0.01;
    p.arch = 0.1;
    p.garch = 0.85;
    const auto filt = marginal_filter({.ar = true}, p, y, {});
    CHECK(filt.sigma2.back() == doctest::Approx(0.01 / 0.15).epsilon(1e-12));
    // the approach is monotone once the shocks stop
    const int n = (int)y.size();
    CHECK(std::fabs(filt.sigma2[n - 1] - 0.01 / 0.15) <=
          std::fabs(filt.sigma2[n - 50] - 0.01 / 0.15));
}

TEST_CASE("filter matches a hand-rolled recursion") {
    const std::vector<double> y{0.4, -0.7, 1.1, 0.2, -0.9, 0.6, -0.1, 0.8};
    const std::vector<double> z{1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 0.0};
    MarginalParams p;
    p.mu = 0.05;
    p.phi = 0.2;
    p.gamma = -0.3;
    p.omega = 0.02;
    p.arch = 0.08;
    p.gjr = 0.1;
    p.garch = 0.7;
    const MarginalModelSpec spec{.ar = true, .exog = true, .gjr = true};
    const auto filt = marginal_filter(spec, p, y, z);

    const int n = (int)y.size();
    const double ybar = mean_of(y);
    std::vector<double> eta(n);
    for (int t = 0; t < n; ++t) {
        const double ylag = t == 0 ? ybar : y[t - 1];
        eta[t] = y[t] - p.mu - p.phi * ylag - p.gamma * z[t];
    }
    const double v = variance_of(eta);
    double ll = 0.0;
    double sig2 = v;
    for (int t = 0; t < n; ++t) {
        if (t > 0) {
            const double e = eta[t - 1];
            sig2 = p.omega + p.arch * e * e + (e < 0 ? p.gjr * e * e : 0.0) +
                   p.garch * sig2;
        }
        CHECK(filt.sigma2[t] == doctest::Approx(sig2).epsilon(1e-13));
        CHECK(filt.eta[t] == doctest::Approx(eta[t]).epsilon(1e-13));
        CHECK(filt.eps[t] == doctest::Approx(eta[t] / std::sqrt(sig2)).epsilon(1e-13));
        ll += -0.5 * (std::log(2.0 * 3.14159265358979323846) + std::log(sig2) +
                      eta[t] * eta[t] / sig2);
    }
    CHECK(filt.loglik == doctest::Approx(ll).epsilon(1e-12));
}

TEST_CASE("fitted point is a local maximum of the filter likelihood") {
    Rng rng(31);
    MarginalParams truth;
    truth.mu = 0.1;
    truth.phi = 0.3;
    truth.omega = 0.05;
    truth.arch = 0.12;
    truth.garch = 0.75;
    const MarginalModelSpec spec{.ar = true};
    const auto path = simulate_ar_garch(truth, 1200, rng);
    const auto fit = fit_marginal(path.y, {}, spec);

    auto ll_at = [&](const MarginalParams& q) {
        return marginal_filter(spec, q, path.y, {}).loglik;
    };
    CHECK(ll_at(fit.params) == doctest::Approx(fit.loglik).epsilon(1e-12));
    const double slack = 1e-6 * std::fabs(fit.loglik);
    for (int trial = 0; trial < 60; ++trial) {
        MarginalParams q = fit.params;
        q.mu += 2e-3 * (rng.uniform() - 0.5);
        q.phi += 2e-3 * (rng.uniform() - 0.5);
        q.omega *= 1.0 + 2e-3 * (rng.uniform() - 0.5);
        q.arch = std::max(1e-6, q.arch + 2e-3 * (rng.uniform() - 0.5));
        q.garch = std::max(1e-6, q.garch + 2e-3 * (rng.uniform() - 0.5));
        if (q.arch + q.garch >= 0.999) continue;
        CHECK(ll_at(q) <= fit.loglik + slack);
    }
}

TEST_CASE("ar-garch parameter recovery with asymptotic errors") {
    MarginalParams truth;
    truth.mu = 0.0;
    truth.phi = 0.1;
    truth.omega = 0.01;
    truth.arch = 0.1;
    truth.garch = 0.85;
    const MarginalModelSpec spec{.ar = true};
    const int n = 5000;
    const int seeds = 100;
    int covered = 0;
    for (int s = 0; s < seeds; ++s) {
        Rng rng = Rng::stream(900, {(std::uint64_t)s});
        const auto path = simulate_ar_garch(truth, n, rng);
        MarginalFit fit;
        try {
            FitOptions opt;
            opt.restarts = 2;
            fit = fit_marginal(path.y, {}, spec, opt);
        } catch (const ConvergenceError&) {
            continue;
        }
        REQUIRE(fit.std_errors.size() == 5);
        const double tr[5] = {truth.mu, truth.phi, truth.omega, truth.arch,
                              truth.garch};
        const double est[5] = {fit.params.mu, fit.params.phi, fit.params.omega,
                               fit.params.arch, fit.params.garch};
        bool all = true;
        for (int i = 0; i < 5; ++i) {
            if (!(std::fabs(est[i] - tr[i]) <= 3.0 * fit.std_errors[i])) all = false;
        }
        covered += all;
        CHECK(fit.grad_norm <= 1e-5);
    }
    CHECK(covered >= 95);
}

TEST_CASE("constant-variance data pins the unconditional variance") {
    Rng rng(32);
    const int n = 2500;
    std::vector<double> y(n);
    for (auto& v : y) v = 0.3 + 0.9 * rng.normal();
    const auto fit = fit_marginal(y, {}, {.ar = true});
    // mean residuals from the fitted AR part
    std::vector<double> eta(n);
    const double ybar = mean_of(y);
    for (int t = 0; t < n; ++t) {
        const double ylag = t == 0 ? ybar : y[t - 1];
        eta[t] = y[t] - fit.params.mu - fit.params.phi * ylag;
    }
    const double v = variance_of(eta);
    const double uncond = fit.params.omega /
                          (1.0 - fit.params.arch - fit.params.gjr / 2.0 -
                           fit.params.garch);
    CHECK(uncond == doctest::Approx(v).epsilon(0.10));
    double sig_mean = mean_of(fit.sigma2);
    CHECK(sig_mean == doctest::Approx(v).epsilon(0.10));
    CHECK(std::fabs(fit.params.arch) < 0.05);
}

TEST_CASE("qml self-consistency") {
    Rng rng(33);
    MarginalParams truth;
    truth.mu = 0.02;
    truth.phi = 0.15;
    truth.omega = 0.02;
    truth.arch = 0.08;
    truth.garch = 0.82;
    const MarginalModelSpec spec{.ar = true};
    const auto path = simulate_ar_garch(truth, 3000, rng);
    const auto fit = fit_marginal(path.y, {}, spec);

    Rng rng2(34);
    const auto path2 = simulate_ar_garch(fit.params, 3000, rng2);
    const auto refit = fit_marginal(path2.y, {}, spec);
    const double a[5] = {fit.params.mu, fit.params.phi, fit.params.omega,
                         fit.params.arch, fit.params.garch};
    const double b[5] = {refit.params.mu, refit.params.phi, refit.params.omega,
                         refit.params.arch, refit.params.garch};
    for (int i = 0; i < 5; ++i) {
        CHECK(std::fabs(a[i] - b[i]) <= 4.0 * refit.std_errors[i]);
    }
}

TEST_CASE("location-scale transformations leave the ranks alone") {
    Rng rng(35);
    MarginalParams truth;
    truth.mu = 0.0;
    truth.phi = 0.2;
    truth.omega = 0.015;
    truth.arch = 0.1;
    truth.garch = 0.8;
    const MarginalModelSpec spec{.ar = true};
    const int n = 1000;
    const auto path = simulate_ar_garch(truth, n, rng);
    const auto fit = fit_marginal(path.y, {}, spec);

    const double a = 3.7, c = 2.5;
    std::vector<double> y2(n);
    for (int t = 0; t < n; ++t) y2[t] = a + c * path.y[t];

    // closed-form parameter map absorbs the transformation exactly
    MarginalParams mapped = fit.params;
    mapped.mu = c * fit.params.mu + a * (1.0 - fit.params.phi);
    mapped.omega = c * c * fit.params.omega;
    const auto filt = marginal_filter(spec, mapped, y2, {});
    for (int t = 0; t < n; ++t) {
        CHECK(filt.eps[t] == doctest::Approx(fit.residuals[t]).epsilon(1e-9));
    }

    // a fresh fit on the transformed data reproduces the rank vector
    const auto fit2 = fit_marginal(y2, {}, spec);
    const auto r1 = oracle::midranks(fit.residuals);
    const auto r2 = oracle::midranks(fit2.residuals);
    int agree = 0;
    for (int t = 0; t < n; ++t) agree += (r1[t] == r2[t]);
    CHECK(agree == n);
}

TEST_CASE("exogenous regressor is recovered in the mean") {
    Rng rng(36);
    const int n = 3000;
    std::vector<double> z(n);
    double zlag = 0.0;
    const double rho = 0.85, sd = std::sqrt(1.0 - 0.85 * 0.85);
    for (int t = 0; t < n; ++t) {
        zlag = rho * zlag + sd * rng.normal();
        z[t] = zlag;
    }
    MarginalParams truth;
    truth.mu = 0.0;
    truth.phi = 0.1;
    truth.gamma = 1.5;
    truth.omega = 0.01;
    truth.arch = 0.1;
    truth.garch = 0.85;
    // simulate with the state in the mean
    std::vector<double> y(n);
    double ylag = 0.0, sig2 = truth.omega / (1.0 - truth.arch - truth.garch),
           eta_lag = 0.0;
    for (int t = 0; t < n; ++t) {
        if (t > 0) sig2 = truth.omega + truth.arch * eta_lag * eta_lag + truth.garch * sig2;
        eta_lag = std::sqrt(sig2) * rng.normal();
        y[t] = truth.mu + truth.phi * ylag + truth.gamma * z[t] + eta_lag;
        ylag = y[t];
    }
    const auto fit = fit_marginal(y, z, {.ar = true, .exog = true});
    REQUIRE(fit.std_errors.size() == 6);
    CHECK(std::fabs(fit.params.gamma - 1.5) <= 4.0 * fit.std_errors[2]);
    CHECK(std::fabs(fit.params.phi - 0.1) <= 4.0 * fit.std_errors[1]);
}

TEST_CASE("gjr asymmetry is picked up") {
    Rng rng(37);
    MarginalParams truth;
    truth.mu = 0.0;
    truth.phi = 0.0;
    truth.omega = 0.02;
    truth.arch = 0.05;
    truth.gjr = 0.10;
    truth.garch = 0.80;
    const int n = 6000;
    std::vector<double> y(n);
    double sig2 = truth.omega / (1.0 - truth.arch - truth.gjr / 2.0 - truth.garch),
           eta_lag = 0.0;
    for (int t = 0; t < n; ++t) {
        if (t > 0)
            sig2 = truth.omega + truth.arch * eta_lag * eta_lag +
                   (eta_lag < 0 ? truth.gjr * eta_lag * eta_lag : 0.0) +
                   truth.garch * sig2;
        eta_lag = std::sqrt(sig2) * rng.normal();
        y[t] = eta_lag;
    }
    const auto fit = fit_marginal(y, {}, {.ar = true, .gjr = true});
    REQUIRE(fit.std_errors.size() == 6);
    CHECK(std::fabs(fit.params.gjr - truth.gjr) <= 4.0 * fit.std_errors[4]);
}

TEST_CASE("explosive data raises an error") {
    Rng rng(38);
    const int n = 200;
    std::vector<double> y(n);
    double ylag = 0.0;
    for (int t = 0; t < n; ++t) {
        ylag = 1.05 * ylag + rng.normal();
        y[t] = ylag;
    }
    CHECK_THROWS((void)fit_marginal(y, {}, {.ar = true}));
}

TEST_CASE("short samples are rejected") {
    std::vector<double> y(10, 0.5);
    CHECK_THROWS_AS((void)fit_marginal(y, {}, {.ar = true}), std::invalid_argument);
}

TEST_CASE("ar1 coefficient least squares") {
    const std::vector<double> z{1.0, 2.0, 1.5, 3.0, 2.5, 2.0};
    const double zbar = mean_of(z);
    double num = 0.0, den = 0.0;
    for (size_t t = 1; t < z.size(); ++t) {
        num += (z[t] - zbar) * (z[t - 1] - zbar);
        den += (z[t - 1] - zbar) * (z[t - 1] - zbar);
    }
    CHECK(ar1_coefficient(z) == doctest::Approx(num / den).epsilon(1e-15));

    Rng rng(39);
    const int n = 20000;
    std::vector<double> w(n);
    double lag = 0.0;
    const double sd = std::sqrt(1.0 - 0.85 * 0.85);
    for (int t = 0; t < n; ++t) {
        lag = 0.85 * lag + sd * rng.normal();
        w[t] = lag;
    }
    CHECK(ar1_coefficient(w) == doctest::Approx(0.85).epsilon(0.03));
    CHECK_THROWS_AS((void)ar1_coefficient({1.0, 2.0}), std::invalid_argument);
}

}  // TEST_SUITE
