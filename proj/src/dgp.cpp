#include "copred/dgp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

#include <json.hpp>

namespace copred {

namespace {

constexpr int kTableCells = 2048;

double clamp_rho(double rho) { return std::clamp(rho, -kRhoClamp, kRhoClamp); }

// Gaussian copula CDF with closed boundaries.
double gauss_copula_cdf(double a, double b, double rho) {
    if (a <= 0.0 || b <= 0.0) return 0.0;
    if (a >= 1.0) return std::min(b, 1.0);
    if (b >= 1.0) return a;
    return bvn_cdf(norm_quantile(a), norm_quantile(b), rho);
}

const char* family_name(CopulaFamily family) {
    switch (family) {
        case CopulaFamily::gaussian: return "gaussian";
        case CopulaFamily::frank: return "frank";
        case CopulaFamily::patchwork: return "patchwork";
    }
    return "gaussian";
}

CopulaFamily family_from_name(const std::string& name) {
    if (name == "gaussian") return CopulaFamily::gaussian;
    if (name == "frank") return CopulaFamily::frank;
    if (name == "patchwork") return CopulaFamily::patchwork;
    throw std::invalid_argument("unknown copula family: " + name);
}

const char* alternative_name(Alternative alternative) {
    switch (alternative) {
        case Alternative::none: return "none";
        case Alternative::constant: return "constant";
        case Alternative::mid_break: return "mid_break";
        case Alternative::offsetting: return "offsetting";
    }
    return "none";
}

Alternative alternative_from_name(const std::string& name) {
    if (name == "none") return Alternative::none;
    if (name == "constant") return Alternative::constant;
    if (name == "mid_break") return Alternative::mid_break;
    if (name == "offsetting") return Alternative::offsetting;
    throw std::invalid_argument("unknown alternative: " + name);
}

}  // namespace

void ScenarioSpec::validate() const {
    if (n < 1) throw std::invalid_argument("scenario length must be positive");
    if (!(std::abs(state_coeff) < 1.0))
        throw std::invalid_argument("state coefficient must satisfy |coeff| < 1");
    switch (family) {
        case CopulaFamily::gaussian:
            if (!(std::abs(rho) < 1.0))
                throw std::invalid_argument("Gaussian copula needs |rho| < 1");
            break;
        case CopulaFamily::frank:
            if (theta == 0.0 || !std::isfinite(theta))
                throw std::invalid_argument("Frank copula needs a finite nonzero theta");
            break;
        case CopulaFamily::patchwork:
            if (!std::isfinite(alpha_in) || !std::isfinite(alpha_out))
                throw std::invalid_argument("patchwork coefficients must be finite");
            break;
    }
    if (alternative != Alternative::none) {
        if (family != CopulaFamily::patchwork)
            throw std::invalid_argument(
                "alternatives move the patch coefficient and need the patchwork family");
        if (!std::isfinite(beta_magnitude))
            throw std::invalid_argument("beta magnitude must be finite");
    }
    const auto& m = marginal;
    if (!(m.omega > 0.0) || m.alpha < 0.0 || m.beta < 0.0 || m.alpha + m.beta >= 1.0)
        throw std::invalid_argument("marginal variance recursion is not stationary");
    if (!(std::abs(m.phi) < 1.0))
        throw std::invalid_argument("marginal AR coefficient must satisfy |phi| < 1");
    if (!std::isfinite(m.mu) || !std::isfinite(m.gamma))
        throw std::invalid_argument("marginal mean parameters must be finite");
}

std::vector<double> simulate_state(int n, double coeff, Rng& rng) {
    if (n < 0) throw std::invalid_argument("state length must be nonnegative");
    if (!(std::abs(coeff) < 1.0))
        throw std::invalid_argument("state coefficient must satisfy |coeff| < 1");
    std::vector<double> z(n);
    if (n == 0) return z;
    const double innov_sd = std::sqrt(1.0 - coeff * coeff);
    z[0] = rng.normal();
    for (int t = 1; t < n; ++t) z[t] = coeff * z[t - 1] + innov_sd * rng.normal();
    return z;
}

std::pair<double, double> sample_gaussian_copula(double rho, Rng& rng) {
    if (!(std::abs(rho) < 1.0))
        throw std::invalid_argument("Gaussian copula needs |rho| < 1");
    const double x = rng.normal();
    const double y = rho * x + std::sqrt(1.0 - rho * rho) * rng.normal();
    return {norm_cdf(x), norm_cdf(y)};
}

std::pair<double, double> sample_frank_copula(double theta, Rng& rng) {
    if (theta == 0.0 || !std::isfinite(theta))
        throw std::invalid_argument("Frank copula needs a finite nonzero theta");
    const double u1 = rng.uniform();
    const double v = rng.uniform();
    const double a = std::exp(-theta * u1);
    // conditional quantile of U2 given U1 = u1 at level v
    double u2 = -std::log1p(v * std::expm1(-theta) / (a - v * (a - 1.0))) / theta;
    u2 = std::clamp(u2, std::numeric_limits<double>::min(), 1.0 - 1e-16);
    return {u1, u2};
}

PatchworkSampler::PatchworkSampler(double alpha_out) {
    if (!std::isfinite(alpha_out))
        throw std::invalid_argument("background coefficient must be finite");
    rho_out_ = clamp_rho(std::tanh(alpha_out));
    patch_mass_ = bvn_cdf(0.0, 0.0, rho_out_);
    table_.resize(kTableCells + 1);
    for (int i = 0; i <= kTableCells; ++i) table_[i] = h(0.5 * i / kTableCells);
}

double PatchworkSampler::h(double v) const {
    if (v <= 0.0) return 0.0;
    if (v >= 0.5) return 1.0;
    return bvn_cdf(norm_quantile(v), 0.0, rho_out_) / patch_mass_;
}

double PatchworkSampler::h_inv(double w) const {
    if (w <= 0.0) return 0.0;
    if (w >= 1.0) return 0.5;
    const auto it = std::upper_bound(table_.begin(), table_.end(), w);
    const size_t cell = std::clamp<size_t>((size_t)(it - table_.begin()), 1, kTableCells);
    double lo = 0.5 * (cell - 1) / kTableCells;
    double hi = 0.5 * cell / kTableCells;
    const double span = std::max(table_[cell] - table_[cell - 1], 1e-300);
    double v = lo + (hi - lo) * (w - table_[cell - 1]) / span;
    const double tail_sd = std::sqrt(1.0 - rho_out_ * rho_out_);
    for (int iter = 0; iter < 80; ++iter) {
        if (!(v > lo) || !(v < hi)) v = 0.5 * (lo + hi);
        const double f = h(v) - w;
        if (std::abs(f) < 1e-15) return v;
        if (f > 0.0) hi = v; else lo = v;
        if (hi - lo < 1e-16) return 0.5 * (lo + hi);
        const double deriv = norm_cdf(-rho_out_ * norm_quantile(v) / tail_sd) / patch_mass_;
        if (deriv > 0.0) v -= f / deriv;
        else v = 0.5 * (lo + hi);
    }
    throw std::runtime_error("patchwork inverse failed at w=" + std::to_string(w) +
                             ", rho_out=" + std::to_string(rho_out_));
}

std::pair<double, double> PatchworkSampler::draw(double alpha_in, Rng& rng) const {
    const auto [v1, v2] = sample_gaussian_copula(rho_out_, rng);
    if (v1 > 0.5 || v2 > 0.5) return {v1, v2};
    const auto [w1, w2] = sample_gaussian_copula(clamp_rho(std::tanh(alpha_in)), rng);
    return {h_inv(w1), h_inv(w2)};
}

double PatchworkSampler::cdf(double u1, double u2, double alpha_in) const {
    u1 = std::clamp(u1, 0.0, 1.0);
    u2 = std::clamp(u2, 0.0, 1.0);
    if (u1 <= 0.5 && u2 <= 0.5) {
        const double rho_in = clamp_rho(std::tanh(alpha_in));
        return patch_mass_ * gauss_copula_cdf(h(u1), h(u2), rho_in);
    }
    return gauss_copula_cdf(u1, u2, rho_out_);
}

std::pair<double, double> sample_patchwork(double alpha_in, double alpha_out, Rng& rng) {
    static std::mutex lock;
    static std::map<double, std::unique_ptr<PatchworkSampler>> cache;
    const PatchworkSampler* sampler;
    {
        std::lock_guard<std::mutex> guard(lock);
        auto& slot = cache[alpha_out];
        if (!slot) slot = std::make_unique<PatchworkSampler>(alpha_out);
        sampler = slot.get();
    }
    return sampler->draw(alpha_in, rng);
}

ScenarioDraw simulate_scenario(const ScenarioSpec& spec, Rng& rng) {
    spec.validate();
    constexpr int kBurn = 500;
    const int total = spec.n + kBurn;
    const auto z = simulate_state(total, spec.state_coeff, rng);

    std::unique_ptr<const PatchworkSampler> patch;
    if (spec.family == CopulaFamily::patchwork)
        patch = std::make_unique<PatchworkSampler>(spec.alpha_out);

    // patch coefficient schedule, indexed by kept observation; the break
    // scenarios switch after observation floor(n/2)
    const auto beta_at = [&](int kept) {
        switch (spec.alternative) {
            case Alternative::none: return 0.0;
            case Alternative::constant: return spec.beta_magnitude;
            case Alternative::mid_break:
                return kept < spec.n / 2 ? 0.0 : spec.beta_magnitude;
            case Alternative::offsetting:
                return kept < spec.n / 2 ? -spec.beta_magnitude : spec.beta_magnitude;
        }
        return 0.0;
    };

    const auto& m = spec.marginal;
    struct MarginState {
        double eta = 0.0;
        double sigma2;
        double y;
    };
    const double uncond = m.omega / (1.0 - m.alpha - m.beta);
    MarginState m1{0.0, uncond, m.mu / (1.0 - m.phi)};
    MarginState m2 = m1;

    ScenarioDraw out;
    out.y1.reserve(spec.n);
    out.y2.reserve(spec.n);
    out.z.reserve(spec.n);
    out.u1.reserve(spec.n);
    out.u2.reserve(spec.n);

    for (int t = 0; t < total; ++t) {
        const int kept = t - kBurn;
        const double beta_t = beta_at(std::max(kept, 0));
        double u1 = 0.5, u2 = 0.5;
        switch (spec.family) {
            case CopulaFamily::gaussian:
                std::tie(u1, u2) = sample_gaussian_copula(spec.rho, rng);
                break;
            case CopulaFamily::frank:
                std::tie(u1, u2) = sample_frank_copula(spec.theta, rng);
                break;
            case CopulaFamily::patchwork:
                std::tie(u1, u2) = patch->draw(spec.alpha_in + beta_t * z[t], rng);
                break;
        }
        const double e1 = norm_quantile(u1);
        const double e2 = norm_quantile(u2);
        const auto step = [&](MarginState& s, double eps) {
            s.sigma2 = m.omega + m.alpha * s.eta * s.eta + m.beta * s.sigma2;
            s.eta = std::sqrt(s.sigma2) * eps;
            s.y = m.mu + m.phi * s.y + m.gamma * z[t] + s.eta;
        };
        step(m1, e1);
        step(m2, e2);
        if (kept >= 0) {
            out.y1.push_back(m1.y);
            out.y2.push_back(m2.y);
            out.z.push_back(z[t]);
            out.u1.push_back(u1);
            out.u2.push_back(u2);
        }
    }
    return out;
}

ScenarioSpec scenario_preset(const std::string& name, int n) {
    ScenarioSpec spec;
    spec.n = n;
    if (name == "gauss") {
        spec.family = CopulaFamily::gaussian;
    } else if (name == "frank") {
        spec.family = CopulaFamily::frank;
    } else if (name == "patch") {
        spec.family = CopulaFamily::patchwork;
    } else if (name == "constant") {
        spec.family = CopulaFamily::patchwork;
        spec.alternative = Alternative::constant;
    } else if (name == "mid-break") {
        spec.family = CopulaFamily::patchwork;
        spec.alternative = Alternative::mid_break;
    } else if (name == "offset") {
        spec.family = CopulaFamily::patchwork;
        spec.alternative = Alternative::offsetting;
    } else {
        throw std::invalid_argument("unknown scenario preset: " + name);
    }
    return spec;
}

std::string scenario_label(const ScenarioSpec& spec) {
    switch (spec.alternative) {
        case Alternative::constant: return "constant";
        case Alternative::mid_break: return "mid-break";
        case Alternative::offsetting: return "offset";
        case Alternative::none: break;
    }
    switch (spec.family) {
        case CopulaFamily::gaussian: return "gauss";
        case CopulaFamily::frank: return "frank";
        case CopulaFamily::patchwork: return "patch";
    }
    return "gauss";
}

std::string scenario_to_json(const ScenarioSpec& spec, int indent) {
    nlohmann::json copula{{"family", family_name(spec.family)}};
    switch (spec.family) {
        case CopulaFamily::gaussian: copula["rho"] = spec.rho; break;
        case CopulaFamily::frank: copula["theta"] = spec.theta; break;
        case CopulaFamily::patchwork:
            copula["alpha_in"] = spec.alpha_in;
            copula["alpha_out"] = spec.alpha_out;
            break;
    }
    nlohmann::json doc{
        {"copula", copula},
        {"alternative", alternative_name(spec.alternative)},
        {"beta", spec.beta_magnitude},
        {"state", spec.state_coeff},
        {"marginal",
         {{"mu", spec.marginal.mu},
          {"phi", spec.marginal.phi},
          {"gamma", spec.marginal.gamma},
          {"omega", spec.marginal.omega},
          {"alpha", spec.marginal.alpha},
          {"beta", spec.marginal.beta}}},
        {"n", spec.n},
    };
    return doc.dump(indent);
}

ScenarioSpec scenario_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("scenario document: ") + e.what());
    }
    ScenarioSpec spec;
    if (doc.contains("copula")) {
        const auto& copula = doc.at("copula");
        spec.family = family_from_name(copula.value("family", "gaussian"));
        spec.rho = copula.value("rho", spec.rho);
        spec.theta = copula.value("theta", spec.theta);
        spec.alpha_in = copula.value("alpha_in", spec.alpha_in);
        spec.alpha_out = copula.value("alpha_out", spec.alpha_out);
    }
    spec.alternative = alternative_from_name(doc.value("alternative", "none"));
    spec.beta_magnitude = doc.value("beta", spec.beta_magnitude);
    spec.state_coeff = doc.value("state", spec.state_coeff);
    if (doc.contains("marginal")) {
        const auto& m = doc.at("marginal");
        spec.marginal.mu = m.value("mu", spec.marginal.mu);
        spec.marginal.phi = m.value("phi", spec.marginal.phi);
        spec.marginal.gamma = m.value("gamma", spec.marginal.gamma);
        spec.marginal.omega = m.value("omega", spec.marginal.omega);
        spec.marginal.alpha = m.value("alpha", spec.marginal.alpha);
        spec.marginal.beta = m.value("beta", spec.marginal.beta);
    }
    spec.n = doc.value("n", spec.n);
    spec.validate();
    return spec;
}

}  // namespace copred
