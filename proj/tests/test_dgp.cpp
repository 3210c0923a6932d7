#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "copred/dgp.hpp"
#include "copred/marginal.hpp"
#include "copred/rng.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace copred;

namespace {

// 5x5 uniform-grid cell counts of a copula sample.
std::array<int, 25> bin_counts(const std::vector<std::pair<double, double>>& uv) {
    std::array<int, 25> counts{};
    for (const auto& [a, b] : uv) {
        const int i = std::min((int)(a * 5.0), 4);
        const int j = std::min((int)(b * 5.0), 4);
        ++counts[i * 5 + j];
    }
    return counts;
}

double chi2_against_uniform(const std::array<int, 25>& counts, int n) {
    const double expected = n / 25.0;
    double stat = 0.0;
    for (int c : counts) stat += (c - expected) * (c - expected) / expected;
    return stat;
}

// 99th percentiles of chi-square with 24, 15 and 12 degrees of freedom.
constexpr double kChi2Crit24 = 42.979820139351636;
constexpr double kChi2Crit15 = 30.577914166892494;
constexpr double kChi2Crit12 = 26.21696730553585;

// 4x4 uniform-grid cell counts, edges at multiples of 0.25 so the patch
// square [0,0.5]^2 is exactly the four lower-left cells.
std::array<int, 16> quarter_counts(const std::vector<std::pair<double, double>>& uv) {
    std::array<int, 16> counts{};
    for (const auto& [a, b] : uv) {
        const int i = std::min((int)(a * 4.0), 3);
        const int j = std::min((int)(b * 4.0), 3);
        ++counts[i * 4 + j];
    }
    return counts;
}

template <typename Sampler>
std::vector<std::pair<double, double>> draw_many(int n, Rng& rng, Sampler&& sampler) {
    std::vector<std::pair<double, double>> uv(n);
    for (auto& p : uv) p = sampler(rng);
    return uv;
}

double lower_quadrant_share(const std::vector<std::pair<double, double>>& uv,
                            double cut, size_t lo, size_t hi) {
    int count = 0;
    for (size_t t = lo; t < hi; ++t)
        count += (uv[t].first <= cut && uv[t].second <= cut);
    return (double)count / (hi - lo);
}

}  // namespace

TEST_SUITE("dgp") {

TEST_CASE("stationary state process") {
    const int n = 100000;
    SUBCASE("zero coefficient gives an iid standard normal sample") {
        Rng rng = Rng::stream(1600, {1});
        const auto z = simulate_state(n, 0.0, rng);
        std::vector<double> pit(n);
        for (int t = 0; t < n; ++t) pit[t] = norm_cdf(z[t]);
        CHECK(oracle::ks_uniform(pit) < oracle::ks_critical(0.01, n));
        std::vector<double> head(z.begin(), z.end() - 1), tail(z.begin() + 1, z.end());
        CHECK(std::abs(oracle::pearson(head, tail)) < 0.01);
    }
    SUBCASE("persistent case keeps unit variance and the nominal autocorrelation") {
        Rng rng = Rng::stream(1600, {2});
        const auto z = simulate_state(n, 0.85, rng);
        std::vector<double> head(z.begin(), z.end() - 1), tail(z.begin() + 1, z.end());
        CHECK(oracle::pearson(head, tail) == doctest::Approx(0.85).epsilon(0.012));
        double mean = 0.0, var = 0.0;
        for (double v : z) mean += v;
        mean /= n;
        for (double v : z) var += (v - mean) * (v - mean);
        var /= n - 1;
        CHECK(var == doctest::Approx(1.0).epsilon(0.02));
    }
    SUBCASE("input validation") {
        Rng rng(1);
        CHECK_THROWS_AS(simulate_state(10, 1.0, rng), std::invalid_argument);
        CHECK_THROWS_AS(simulate_state(10, -1.2, rng), std::invalid_argument);
        CHECK_THROWS_AS(simulate_state(-1, 0.5, rng), std::invalid_argument);
        CHECK(simulate_state(0, 0.5, rng).empty());
    }
}

TEST_CASE("gaussian copula sampler") {
    const int n = 100000;
    SUBCASE("independence case on a 5x5 grid") {
        Rng rng = Rng::stream(1600, {3});
        const auto uv = draw_many(n, rng, [](Rng& r) { return sample_gaussian_copula(0.0, r); });
        CHECK(chi2_against_uniform(bin_counts(uv), n) < kChi2Crit24);
        std::vector<double> u1(n), u2(n);
        for (int t = 0; t < n; ++t) std::tie(u1[t], u2[t]) = uv[t];
        CHECK(oracle::ks_uniform(u1) < oracle::ks_critical(0.01, n));
        CHECK(oracle::ks_uniform(u2) < oracle::ks_critical(0.01, n));
    }
    SUBCASE("dependent case matches the copula at reference points") {
        const double rho = std::tanh(0.5);
        CHECK(oracle::bvn_cdf_simpson(0.0, 0.0, rho) ==
              doctest::Approx(0.326455023311951977).epsilon(1e-9));
        Rng rng = Rng::stream(1600, {4});
        const auto uv = draw_many(n, rng, [&](Rng& r) { return sample_gaussian_copula(rho, r); });
        double at_half = 0.0, at_tail = 0.0;
        for (const auto& [a, b] : uv) {
            at_half += (a <= 0.5 && b <= 0.5);
            at_tail += (a <= 0.05 && b <= 0.05);
        }
        at_half /= n;
        at_tail /= n;
        const double se_half = std::sqrt(0.326455 * (1.0 - 0.326455) / n);
        const double se_tail = std::sqrt(0.011082 * (1.0 - 0.011082) / n);
        CHECK(std::abs(at_half - 0.326455023311951977) <= 3.0 * se_half);
        CHECK(std::abs(at_tail - 0.0110823847379166843) <= 3.0 * se_tail);
    }
    SUBCASE("input validation") {
        Rng rng(2);
        CHECK_THROWS_AS(sample_gaussian_copula(1.0, rng), std::invalid_argument);
        CHECK_THROWS_AS(sample_gaussian_copula(-1.5, rng), std::invalid_argument);
    }
}

TEST_CASE("frank copula sampler") {
    const int n = 100000;
    SUBCASE("vanishing parameter approximates independence") {
        Rng rng = Rng::stream(1600, {5});
        const auto uv = draw_many(n, rng, [](Rng& r) { return sample_frank_copula(1e-4, r); });
        CHECK(chi2_against_uniform(bin_counts(uv), n) < kChi2Crit24);
        std::vector<double> u1(n), u2(n);
        for (int t = 0; t < n; ++t) std::tie(u1[t], u2[t]) = uv[t];
        CHECK(oracle::ks_uniform(u1) < oracle::ks_critical(0.01, n));
        CHECK(oracle::ks_uniform(u2) < oracle::ks_critical(0.01, n));
    }
    SUBCASE("kendall tau against the Debye quadrature") {
        CHECK(oracle::frank_tau(2.0) == doctest::Approx(0.2138945692196201).epsilon(1e-12));
        CHECK(oracle::frank_tau(-2.0) == doctest::Approx(-0.2138945692196201).epsilon(1e-12));
        Rng rng = Rng::stream(1600, {6});
        const auto uv = draw_many(n, rng, [](Rng& r) { return sample_frank_copula(2.0, r); });
        std::vector<double> u1(n), u2(n);
        for (int t = 0; t < n; ++t) std::tie(u1[t], u2[t]) = uv[t];
        CHECK(std::abs(oracle::kendall_tau(u1, u2) - oracle::frank_tau(2.0)) < 0.01);
        CHECK(oracle::ks_uniform(u1) < oracle::ks_critical(0.01, n));
        CHECK(oracle::ks_uniform(u2) < oracle::ks_critical(0.01, n));
    }
    SUBCASE("negative parameter flips the dependence") {
        Rng rng = Rng::stream(1600, {7});
        const auto uv = draw_many(n, rng, [](Rng& r) { return sample_frank_copula(-3.0, r); });
        std::vector<double> u1(n), u2(n);
        for (int t = 0; t < n; ++t) std::tie(u1[t], u2[t]) = uv[t];
        CHECK(std::abs(oracle::kendall_tau(u1, u2) - oracle::frank_tau(-3.0)) < 0.01);
    }
    SUBCASE("input validation") {
        Rng rng(3);
        CHECK_THROWS_AS(sample_frank_copula(0.0, rng), std::invalid_argument);
    }
}

TEST_CASE("patchwork sampler") {
    const PatchworkSampler sampler(0.5);
    SUBCASE("rescale map and closed-form values") {
        CHECK(sampler.patch_mass() == doctest::Approx(0.326455023311951977).epsilon(1e-13));
        CHECK(sampler.h(0.0) == 0.0);
        CHECK(sampler.h(0.5) == 1.0);
        CHECK(sampler.h(0.25) == doctest::Approx(0.565918235967324763).epsilon(1e-13));
        double prev = 0.0;
        for (int i = 1; i <= 50; ++i) {
            const double cur = sampler.h(0.5 * i / 50.0);
            CHECK(cur > prev);
            prev = cur;
        }
        for (double v : {0.01, 0.1, 0.25, 0.4, 0.49})
            CHECK(sampler.h_inv(sampler.h(v)) == doctest::Approx(v).epsilon(1e-10));
        for (double w : {1e-6, 0.05, 0.3, 0.7, 0.95, 0.999999})
            CHECK(sampler.h(sampler.h_inv(w)) == doctest::Approx(w).epsilon(1e-11));
        CHECK(sampler.h_inv(0.0) == 0.0);
        CHECK(sampler.h_inv(1.0) == 0.5);
    }
    SUBCASE("closed-form CDF") {
        CHECK(sampler.cdf(0.25, 0.25, 0.25) ==
              doctest::Approx(0.117094835460075997).epsilon(1e-12));
        CHECK(sampler.cdf(1.0, 0.7, 0.25) == doctest::Approx(0.7).epsilon(1e-14));
        CHECK(sampler.cdf(0.7, 1.0, 0.25) == doctest::Approx(0.7).epsilon(1e-14));
        CHECK(sampler.cdf(0.0, 0.3, 0.25) == 0.0);
        // the patch rescale keeps the CDF continuous across the square edge
        CHECK(sampler.cdf(0.5, 0.3, 0.25) ==
              doctest::Approx(sampler.cdf(0.5 + 1e-12, 0.3, 0.25)).epsilon(1e-8));
    }
    SUBCASE("degenerate patch keeps the background outside the square") {
        // gluing a Gaussian patch through the conditional-marginal rescale
        // changes the law inside [0,0.5]^2 even when the correlations agree
        // (the conditional copula of a Gaussian is not Gaussian), but the
        // background mass and everything outside the square are preserved
        const int n = 100000;
        Rng rng_a = Rng::stream(1600, {8});
        Rng rng_b = Rng::stream(1600, {9});
        const auto uv_a = draw_many(n, rng_a, [&](Rng& r) { return sampler.draw(0.5, r); });
        const auto uv_b = draw_many(
            n, rng_b, [](Rng& r) { return sample_gaussian_copula(std::tanh(0.5), r); });
        const auto qa = quarter_counts(uv_a);
        const auto qb = quarter_counts(uv_b);
        // 12 outside cells plus the pooled square mass: 13 cells, 12 dof
        double stat = 0.0;
        int square_a = 0, square_b = 0;
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 4; ++j) {
                if (i < 2 && j < 2) {
                    square_a += qa[i * 4 + j];
                    square_b += qb[i * 4 + j];
                    continue;
                }
                const double tot = qa[i * 4 + j] + qb[i * 4 + j];
                const double diff = qa[i * 4 + j] - qb[i * 4 + j];
                if (tot > 0.0) stat += diff * diff / tot;
            }
        }
        stat += (double)(square_a - square_b) * (square_a - square_b) / (square_a + square_b);
        CHECK(stat < kChi2Crit12);
    }
    SUBCASE("draws match the closed-form CDF cell by cell") {
        const int n = 100000;
        Rng rng = Rng::stream(1600, {16});
        const auto uv = draw_many(n, rng, [&](Rng& r) { return sampler.draw(0.25, r); });
        const auto counts = quarter_counts(uv);
        double stat = 0.0;
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 4; ++j) {
                const double hi1 = (i + 1) / 4.0, lo1 = i / 4.0;
                const double hi2 = (j + 1) / 4.0, lo2 = j / 4.0;
                const double p = sampler.cdf(hi1, hi2, 0.25) - sampler.cdf(lo1, hi2, 0.25) -
                                 sampler.cdf(hi1, lo2, 0.25) + sampler.cdf(lo1, lo2, 0.25);
                stat += (counts[i * 4 + j] - n * p) * (counts[i * 4 + j] - n * p) / (n * p);
            }
        }
        CHECK(stat < kChi2Crit15);
    }
    SUBCASE("uniform marginals and the frozen corner probability") {
        const int n = 100000;
        Rng rng = Rng::stream(1600, {10});
        const auto uv = draw_many(n, rng, [&](Rng& r) { return sampler.draw(0.25, r); });
        std::vector<double> u1(n), u2(n);
        for (int t = 0; t < n; ++t) std::tie(u1[t], u2[t]) = uv[t];
        CHECK(oracle::ks_uniform(u1) < oracle::ks_critical(0.01, n));
        CHECK(oracle::ks_uniform(u2) < oracle::ks_critical(0.01, n));
        const double share = lower_quadrant_share(uv, 0.25, 0, n);
        const double se = std::sqrt(0.117095 * (1.0 - 0.117095) / n);
        CHECK(std::abs(share - 0.117094835460075997) <= 3.0 * se);
    }
    SUBCASE("convenience wrapper matches the sampler") {
        Rng rng_a = Rng::stream(1600, {11});
        Rng rng_b = Rng::stream(1600, {11});
        for (int i = 0; i < 200; ++i) {
            const auto a = sampler.draw(0.25, rng_a);
            const auto b = sample_patchwork(0.25, 0.5, rng_b);
            CHECK(a.first == b.first);
            CHECK(a.second == b.second);
        }
    }
}

TEST_CASE("scenario configuration") {
    SUBCASE("presets carry the study designs") {
        const auto gauss = scenario_preset("gauss", 500);
        CHECK(gauss.family == CopulaFamily::gaussian);
        CHECK(gauss.rho == doctest::Approx(std::tanh(0.5)).epsilon(1e-15));
        CHECK(gauss.n == 500);
        CHECK(scenario_preset("frank", 100).theta == 2.0);
        const auto patch = scenario_preset("patch", 100);
        CHECK(patch.alpha_in == 0.25);
        CHECK(patch.alpha_out == 0.5);
        const auto offset = scenario_preset("offset", 100);
        CHECK(offset.alternative == Alternative::offsetting);
        CHECK(offset.beta_magnitude == 0.5);
        for (const char* name : {"gauss", "frank", "patch", "constant", "mid-break", "offset"})
            CHECK(scenario_label(scenario_preset(name, 100)) == name);
        CHECK_THROWS_AS(scenario_preset("webull", 100), std::invalid_argument);
    }
    SUBCASE("json round trip") {
        for (const char* name : {"gauss", "frank", "patch", "constant", "mid-break", "offset"}) {
            const auto spec = scenario_preset(name, 777);
            const auto text = scenario_to_json(spec);
            const auto back = scenario_from_json(text);
            CHECK(scenario_to_json(back) == text);
            CHECK(back.n == 777);
            CHECK(scenario_label(back) == name);
        }
        const auto spec = scenario_from_json(
            R"({"copula": {"family": "frank", "theta": 4.0}, "n": 250})");
        CHECK(spec.family == CopulaFamily::frank);
        CHECK(spec.theta == 4.0);
        CHECK(spec.n == 250);
        CHECK(spec.state_coeff == 0.85);
        CHECK(spec.marginal.gamma == 1.5);
    }
    SUBCASE("invalid configurations are rejected") {
        CHECK_THROWS_AS(scenario_from_json("not json"), std::invalid_argument);
        CHECK_THROWS_AS(scenario_from_json(R"({"copula": {"family": "clayton"}})"),
                        std::invalid_argument);
        CHECK_THROWS_AS(
            scenario_from_json(R"({"copula": {"family": "gaussian"}, "alternative": "constant"})"),
            std::invalid_argument);
        ScenarioSpec bad;
        bad.n = 0;
        CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
        bad = ScenarioSpec{};
        bad.state_coeff = 1.0;
        CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
        bad = ScenarioSpec{};
        bad.family = CopulaFamily::frank;
        bad.theta = 0.0;
        CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
        bad = ScenarioSpec{};
        bad.marginal.alpha = 0.3;
        bad.marginal.beta = 0.7;
        CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
        bad = ScenarioSpec{};
        bad.alternative = Alternative::constant;
        CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    }
}

TEST_CASE("simulated scenarios") {
    SUBCASE("a zero-magnitude alternative reproduces the null draw bit for bit") {
        auto null_spec = scenario_preset("patch", 800);
        auto alt_spec = scenario_preset("mid-break", 800);
        alt_spec.beta_magnitude = 0.0;
        Rng rng_a = Rng::stream(1600, {12});
        Rng rng_b = Rng::stream(1600, {12});
        const auto a = simulate_scenario(null_spec, rng_a);
        const auto b = simulate_scenario(alt_spec, rng_b);
        CHECK(a.y1 == b.y1);
        CHECK(a.y2 == b.y2);
        CHECK(a.z == b.z);
        CHECK(a.u1 == b.u1);
        CHECK(a.u2 == b.u2);
    }
    SUBCASE("pre-break half of the mid-break design matches the null copula") {
        auto spec = scenario_preset("mid-break", 3000);
        Rng rng = Rng::stream(1600, {13});
        const auto draw = simulate_scenario(spec, rng);
        REQUIRE((int)draw.u1.size() == 3000);
        std::vector<std::pair<double, double>> uv(3000);
        for (int t = 0; t < 3000; ++t) uv[t] = {draw.u1[t], draw.u2[t]};
        const double share = lower_quadrant_share(uv, 0.25, 0, 1500);
        const double se = std::sqrt(0.117095 * (1.0 - 0.117095) / 1500.0);
        CHECK(std::abs(share - 0.117094835460075997) <= 3.0 * se);
    }
    SUBCASE("marginal estimation recovers the data-generating parameters") {
        const auto spec = scenario_preset("gauss", 5000);
        Rng rng = Rng::stream(1600, {14});
        const auto draw = simulate_scenario(spec, rng);
        const MarginalModelSpec mspec{.ar = true, .exog = true, .gjr = false};
        const auto fit = fit_marginal(draw.y1, draw.z, mspec);
        REQUIRE(fit.converged);
        REQUIRE(fit.std_errors.size() == 6);
        CHECK(std::fabs(fit.params.mu - 0.0) <= 4.0 * fit.std_errors[0]);
        CHECK(std::fabs(fit.params.phi - 0.1) <= 4.0 * fit.std_errors[1]);
        CHECK(std::fabs(fit.params.gamma - 1.5) <= 4.0 * fit.std_errors[2]);
        CHECK(fit.params.gamma == doctest::Approx(1.5).epsilon(0.03));
        CHECK(fit.params.arch == doctest::Approx(0.1).epsilon(0.5));
        CHECK(fit.params.garch == doctest::Approx(0.85).epsilon(0.1));
        // the state series retains its own dynamics inside the draw
        CHECK(ar1_coefficient(draw.z) == doctest::Approx(0.85).epsilon(0.03));
    }
    SUBCASE("deterministic given the stream") {
        const auto spec = scenario_preset("offset", 400);
        Rng rng_a = Rng::stream(1600, {15});
        Rng rng_b = Rng::stream(1600, {15});
        const auto a = simulate_scenario(spec, rng_a);
        const auto b = simulate_scenario(spec, rng_b);
        CHECK(a.y1 == b.y1);
        CHECK(a.u2 == b.u2);
        CHECK((int)a.y1.size() == 400);
        CHECK((int)a.z.size() == 400);
    }
}

}  // TEST_SUITE
