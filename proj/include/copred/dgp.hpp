#pragma once

// Synthetic data generation for the simulation study: an AR(1) state, three
// static copula families for the innovations (Gaussian, Frank, and a
// rectangular Gaussian patchwork), time-varying patchwork alternatives
// driven by the state, and AR(1)-GARCH(1,1) margins on top.
//
// The patchwork copula equals a background Gaussian copula outside
// [0,0.5]^2; inside, the mass C_out(0.5,0.5) is redistributed as a patch
// Gaussian copula after rescaling each coordinate by
// h(v) = C_out(v, 0.5) / C_out(0.5, 0.5). Its CDF on the square is
// C_out(0.5,0.5) * C_in(h(u1), h(u2)). A "correlation surface" that jumps
// between rectangles does not by itself define a copula; the patchwork
// construction is the standard way to realize one, with tanh(alpha_in) the
// patch correlation and tanh(alpha_out) the background correlation.

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "copred/rng.hpp"

namespace copred {

// True parameter values of one simulated margin,
//   y_t = mu + phi y_{t-1} + gamma z_t + eta_t,
//   sigma2_t = omega + alpha eta_{t-1}^2 + beta sigma2_{t-1}.
struct ArGarchParams {
    double mu = 0.0;
    double phi = 0.1;
    double gamma = 1.5;
    double omega = 0.01;
    double alpha = 0.1;
    double beta = 0.85;
};

enum class CopulaFamily { gaussian, frank, patchwork };

// How the patch coefficient moves over time. The break scenarios switch at
// observation floor(n/2), counting from one.
enum class Alternative { none, constant, mid_break, offsetting };

struct ScenarioSpec {
    CopulaFamily family = CopulaFamily::gaussian;
    double rho = 0.46211715726000974;  // tanh(1/2), Gaussian family
    double theta = 2.0;                // Frank family
    double alpha_in = 0.25;            // patchwork, patch Fisher scale
    double alpha_out = 0.5;            // patchwork, background Fisher scale
    Alternative alternative = Alternative::none;
    double beta_magnitude = 0.5;
    double state_coeff = 0.85;
    ArGarchParams marginal{};
    int n = 1000;

    // Throws std::invalid_argument on any violated constraint. Alternatives
    // require the patchwork family: only the patch coefficient moves.
    void validate() const;
};

// One simulated sample, burn-in already dropped. The latent copula draws
// are kept alongside the observed series for diagnostics.
struct ScenarioDraw {
    std::vector<double> y1, y2, z;
    std::vector<double> u1, u2;
};

// Stationary AR(1) with unit marginal variance: z_0 ~ N(0,1), innovation
// variance 1 - coeff^2. Throws std::invalid_argument unless |coeff| < 1.
std::vector<double> simulate_state(int n, double coeff, Rng& rng);

// One pair from the Gaussian copula with correlation rho, |rho| < 1.
std::pair<double, double> sample_gaussian_copula(double rho, Rng& rng);

// One pair from the Frank copula via conditional inversion; theta != 0.
std::pair<double, double> sample_frank_copula(double theta, Rng& rng);

// Sampler for the rectangular patchwork with a fixed background. The
// coordinate rescale h and its inverse depend only on the background, so
// they are tabulated once and the patch coefficient may vary per draw.
class PatchworkSampler {
  public:
    explicit PatchworkSampler(double alpha_out);

    std::pair<double, double> draw(double alpha_in, Rng& rng) const;

    // Closed-form CDF of the patchwork copula at (u1, u2) in [0,1]^2.
    double cdf(double u1, double u2, double alpha_in) const;

    // Coordinate rescale h(v) = C_out(v, 0.5) / C_out(0.5, 0.5) on [0, 0.5]
    // and its inverse on [0, 1]. h_inv throws std::runtime_error if the
    // Newton/bisection polish fails to bracket.
    double h(double v) const;
    double h_inv(double w) const;

    // Probability C_out(0.5, 0.5) of landing in the patch.
    double patch_mass() const { return patch_mass_; }

  private:
    double rho_out_;
    double patch_mass_;
    std::vector<double> table_;  // h on a uniform grid over [0, 0.5]
};

// Convenience draw that caches one sampler per distinct alpha_out.
std::pair<double, double> sample_patchwork(double alpha_in, double alpha_out, Rng& rng);

// Full scenario: state, copula innovations (with the per-time patch
// coefficient alpha_in + beta_t z_t under alternatives), and the
// AR(1)-GARCH(1,1) margins with gamma z_t in each mean. 500 burn-in
// observations are generated and dropped.
ScenarioDraw simulate_scenario(const ScenarioSpec& spec, Rng& rng);

// The six named designs of the simulation study: "gauss", "frank", "patch"
// under the null and "constant", "mid-break", "offset" under the
// alternative. Throws std::invalid_argument for unknown names.
ScenarioSpec scenario_preset(const std::string& name, int n);

// Short label for tables: the preset name when the spec matches one shape,
// otherwise family/alternative derived.
std::string scenario_label(const ScenarioSpec& spec);

// JSON round trip. scenario_from_json accepts the document produced by
// scenario_to_json and fills unspecified fields with defaults.
std::string scenario_to_json(const ScenarioSpec& spec, int indent = -1);
ScenarioSpec scenario_from_json(const std::string& text);

}  // namespace copred
