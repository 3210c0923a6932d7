#include "copred/gauss.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"

using namespace copred;

TEST_SUITE_BEGIN("gauss");

TEST_CASE("normal cdf against Simpson integration of the density") {
    for (double x : {-8.0, -5.0, -2.5, -1.0, -0.3, 0.0, 0.4, 1.0, 1.959964, 3.0, 6.0}) {
        const double ref = (double)oracle::norm_cdf_simpson(x);
        CHECK(std::fabs(norm_cdf(x) - ref) <= 1e-12);
    }
    CHECK(norm_cdf(1.959964) == doctest::Approx(0.9750000009035576).epsilon(1e-9));
    CHECK(norm_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("quantile and cdf invert each other") {
    for (double p = 1e-10; p < 1.0; p = p < 0.5 ? p * 3.7 : 1.0 - (1.0 - p) / 3.7) {
        CHECK(std::fabs(norm_cdf(norm_quantile(p)) - p) <= 1e-12);
    }
    CHECK(norm_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
    CHECK(norm_quantile(0.5) == 0.0);
    CHECK_THROWS_AS(norm_quantile(0.0), std::domain_error);
    CHECK_THROWS_AS(norm_quantile(1.0), std::domain_error);
    CHECK_THROWS_AS(norm_quantile(-0.1), std::domain_error);
}

TEST_CASE("bvn cdf satisfies the arcsin identity at the origin") {
    for (double rho : {-0.9, -0.5, 0.0, 0.5, 0.9}) {
        const double expect = 0.25 + std::asin(rho) / (2.0 * std::numbers::pi);
        CHECK(std::fabs(bvn_cdf(0.0, 0.0, rho) - expect) <= 1e-10);
    }
}

TEST_CASE("bvn cdf against frozen high precision references") {
    // reference values computed with 30-digit quadrature
    struct Case { double z1, z2, rho, value; };
    const Case cases[] = {
        {0.3, -0.6, 0.35, 0.212965693703460892553938389559},
        {-1.2, 0.7, -0.8, 0.0196765838056979305822083654648},
        {1.5, 1.5, 0.95, 0.916939802257928530128174248243},
        {-2.0, -2.0, 0.5, 0.00405294623516297969454782239733},
        {0.0, 0.0, 0.99, 0.477473293177793948067166157535},
        {2.5, -1.0, -0.3, 0.15594532015257348193187213464},
        {-0.5, 0.5, 0.9999, 0.308537538725986896362295389392},
        {1.0, 2.0, -0.95, 0.818594614120363741384963715756},
    };
    for (const auto& c : cases) {
        CHECK(std::fabs(bvn_cdf(c.z1, c.z2, c.rho) - c.value) <= 1e-12);
    }
}

TEST_CASE("bvn cdf against the Simpson oracle on a lattice") {
    for (double rho : {-0.98, -0.6, -0.2, 0.0, 0.3, 0.77, 0.95}) {
        for (double z1 : {-2.2, -0.7, 0.0, 0.9, 2.4}) {
            for (double z2 : {-1.8, -0.2, 0.6, 2.1}) {
                const double ref = oracle::bvn_cdf_simpson(z1, z2, rho);
                CHECK(std::fabs(bvn_cdf(z1, z2, rho) - ref) <= 1e-10);
            }
        }
    }
}

TEST_CASE("bvn cdf degenerate correlations") {
    CHECK(bvn_cdf(0.4, 1.1, 1.0) == norm_cdf(0.4));
    CHECK(bvn_cdf(0.4, -1.1, 1.0) == norm_cdf(-1.1));
    CHECK(bvn_cdf(0.4, 1.1, -1.0) ==
          doctest::Approx(norm_cdf(0.4) + norm_cdf(1.1) - 1.0).epsilon(1e-14));
    CHECK(bvn_cdf(-1.0, -1.0, -1.0) == 0.0);
    CHECK_THROWS_AS(bvn_cdf(0.0, 0.0, 1.5), std::domain_error);
}

TEST_CASE("copula value stays inside the Frechet interval") {
    std::mt19937_64 gen(42);
    std::uniform_real_distribution<double> uu(0.01, 0.99), rr(-0.999, 0.999);
    for (int i = 0; i < 500; ++i) {
        const GridPoint u{uu(gen), uu(gen)};
        const double rho = rr(gen);
        const double c = copula_value(u, rho);
        CHECK(c >= std::max(0.0, u.u1 + u.u2 - 1.0));
        CHECK(c <= std::min(u.u1, u.u2));
    }
    // extreme correlations are clamped rather than rejected
    CHECK_NOTHROW(copula_value(GridPoint{0.3, 0.4}, 1.0));
    CHECK_NOTHROW(copula_value(GridPoint{0.3, 0.4}, -1.0));
    CHECK_THROWS_AS(copula_value(GridPoint{0.0, 0.4}, 0.2), std::domain_error);
    CHECK_THROWS_AS(copula_value(GridPoint{0.4, 1.0}, 0.2), std::domain_error);
}

TEST_CASE("copula value is monotone in rho and symmetric") {
    const GridPoint u{0.3, 0.55};
    double prev = copula_value(u, -0.999);
    for (double rho = -0.9; rho <= 0.95; rho += 0.05) {
        const double c = copula_value(u, rho);
        CHECK(c >= prev);
        prev = c;
        // exchange symmetry in the arguments
        CHECK(copula_value(GridPoint{u.u2, u.u1}, rho) == doctest::Approx(c).epsilon(1e-13));
    }
    // radial symmetry of the Gaussian copula:
    // C(u1,u2;rho) = u1 + u2 - 1 + C(1-u1, 1-u2; rho)
    for (double rho : {-0.7, -0.1, 0.45, 0.9}) {
        const double lhs = copula_value(GridPoint{0.2, 0.7}, rho);
        const double rhs = 0.2 + 0.7 - 1.0 + copula_value(GridPoint{0.8, 0.3}, rho);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
    // known value: C(0.25,0.25;tanh(1/4))
    CHECK(copula_value(GridPoint{0.25, 0.25}, 0.2449186624037091) ==
          doctest::Approx(0.0887301074963506505820778806579).epsilon(1e-12));
}

TEST_CASE("quadrant probabilities sum to one and hit the floor when extreme") {
    const GridPoint u{0.25, 0.6};
    const auto probs = quadrant_probs(u, 0.2449186624037091);
    CHECK(!probs.floored);
    CHECK(probs.p[0] == doctest::Approx(0.179569511929360831996459701528).epsilon(1e-12));
    CHECK(probs.p[1] == doctest::Approx(0.0704304880706391680035402984723).epsilon(1e-11));
    CHECK(probs.p[2] == doctest::Approx(0.420430488070639168003540298472).epsilon(1e-11));
    CHECK(probs.p[3] == doctest::Approx(0.329569511929360831996459701528).epsilon(1e-11));
    double total = 0.0;
    for (double pj : probs.p) total += pj;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

    // strongly negative dependence empties the joint lower quadrant
    const auto floored = quadrant_probs(GridPoint{0.02, 0.02}, -0.999999);
    CHECK(floored.floored);
    CHECK(floored.p[0] == kProbFloor);
}

TEST_CASE("copula derivatives match finite differences") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> uu(0.05, 0.95), rr(-0.9, 0.9);
    for (int i = 0; i < 60; ++i) {
        const GridPoint u{uu(gen), uu(gen)};
        const double rho = rr(gen);
        auto f = [&](double r) { return copula_value(u, r); };
        const double d1 = oracle::fd1(f, rho, 1e-6);
        const double d2 = oracle::fd2(f, rho, 1e-4);
        CHECK(std::fabs(copula_drho(u, rho) - d1) <= 1e-6);
        CHECK(std::fabs(copula_ddrho(u, rho) - d2) <= 1e-5);
    }
    // frozen second derivative at a reference point
    CHECK(copula_ddrho(GridPoint{0.25, 0.6}, 0.2449186624037091) ==
          doctest::Approx(-0.0105214767157810031729642902466).epsilon(1e-9));
}

TEST_CASE("drho equals the bivariate normal density at the quantiles") {
    const GridPoint u{0.25, 0.6};
    const double rho = 0.2449186624037091;
    CHECK(copula_drho(u, rho) ==
          doctest::Approx(0.119123611099596261705616543903).epsilon(1e-12));
}

TEST_CASE("link scale factor") {
    // tau(u, alpha) = (1 - rho^2) C_rho with rho = tanh(alpha)
    const GridPoint u{0.5, 0.5};
    const double tau0 = link_tau(u, 0.0);
    CHECK(tau0 == doctest::Approx(1.0 / (2.0 * std::numbers::pi)).epsilon(1e-12));
    // odd symmetry of rho does not carry to tau in general, but at the
    // median the density is symmetric in the sign of rho
    CHECK(link_tau(u, 0.7) == doctest::Approx(link_tau(u, -0.7)).epsilon(1e-12));
}

TEST_CASE("log-likelihood hessian in alpha") {
    // all p_j = 1/4 at the independence point of the median grid point
    const GridPoint u{0.5, 0.5};
    const std::array<double, 4> counts{25.0, 25.0, 25.0, 25.0};
    const double tau0 = link_tau(u, 0.0);
    const double expect = -tau0 * tau0 * 16.0 * 100.0;
    CHECK(loglik_hess_alpha(u, 0.0, counts) == doctest::Approx(expect).epsilon(1e-10));

    // matches a central second difference of sum_j N_j log p_j away from the
    // probability floor (where the clamped likelihood is no longer smooth)
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> uu(0.1, 0.9), aa(-1.5, 1.5);
    int checked = 0;
    for (int i = 0; i < 200 && checked < 40; ++i) {
        const GridPoint up{uu(gen), uu(gen)};
        const double alpha = aa(gen);
        const auto probs = quadrant_probs(up, std::tanh(alpha));
        double pmin = 1.0;
        for (double pj : probs.p) pmin = std::min(pmin, pj);
        if (pmin < 1e-6) continue;
        ++checked;
        std::array<double, 4> nj{};
        for (auto& v : nj) v = std::floor(uu(gen) * 100.0) + 1.0;
        auto loglik = [&](double a) {
            const auto pr = quadrant_probs(up, std::tanh(a));
            double s = 0.0;
            for (int j = 0; j < 4; ++j) s += nj[j] * std::log(pr.p[j]);
            return s;
        };
        const double fd = oracle::fd2_rich(loglik, alpha, 1e-3);
        const double an = loglik_hess_alpha(up, alpha, nj);
        CHECK(std::fabs(an - fd) <= 1e-5 * std::max(1.0, std::fabs(fd)));
    }
    CHECK(checked == 40);

    // negative wherever the counts are proportional to the model
    // probabilities, i.e. at the maximizer of the likelihood
    std::uniform_real_distribution<double> aa2(-2.0, 2.0);
    for (int i = 0; i < 40; ++i) {
        const GridPoint up{uu(gen), uu(gen)};
        const double alpha = aa2(gen);
        const auto probs = quadrant_probs(up, std::tanh(alpha));
        std::array<double, 4> nj{};
        for (int j = 0; j < 4; ++j) nj[j] = 1000.0 * probs.p[j];
        CHECK(loglik_hess_alpha(up, alpha, nj) < 0.0);
    }
}

TEST_SUITE_END();
