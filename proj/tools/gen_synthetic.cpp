// Regenerates data/synthetic_returns.csv, the bundled daily sample used by
// the examples and the end-to-end tests. Fixed seed, so the output is
// byte-stable across runs.
//
// Design: asset and market follow AR(1)-GJR-GARCH(1,1) margins on a daily
// return scale; the innovation copula is Gaussian with correlation
// tanh(0.30 + beta_t z_t) where z_t indicates a down market day t-1 and the
// state coefficient beta jumps from 0 to 1.25 at the break row. Dates walk
// weekdays only, starting 2000/01/03.

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "copred/gauss.hpp"
#include "copred/rng.hpp"

namespace {

bool leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int month_days(int y, int m) {
    static const int d[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    return m == 2 && leap(y) ? 29 : d[m - 1];
}

int day_of_week(int y, int m, int d) {  // 0 = Sunday
    static const int t[] = {0, 3, 2, 5, 0, 3, 5, 1, 4, 6, 2, 4};
    if (m < 3) y -= 1;
    return (y + y / 4 - y / 100 + y / 400 + t[m - 1] + d) % 7;
}

struct Date {
    int y, m, d;
    void next_weekday() {
        do {
            if (++d > month_days(y, m)) {
                d = 1;
                if (++m > 12) {
                    m = 1;
                    ++y;
                }
            }
        } while (day_of_week(y, m, d) == 0 || day_of_week(y, m, d) == 6);
    }
};

struct Margin {
    double mu, phi, omega, arch, gjr, garch;
    double y_prev = 0.0, eps_prev = 0.0, h_prev;
    explicit Margin(double mu_, double phi_, double omega_, double arch_, double gjr_,
                    double garch_)
        : mu(mu_), phi(phi_), omega(omega_), arch(arch_), gjr(gjr_), garch(garch_) {
        h_prev = omega / (1.0 - arch - gjr / 2.0 - garch);
    }
    double step(double eta, double mean_shift) {
        const double h = omega + (arch + (eps_prev < 0.0 ? gjr : 0.0)) * eps_prev * eps_prev +
                         garch * h_prev;
        const double eps = std::sqrt(h) * eta;
        const double y = mu + mean_shift + phi * y_prev + eps;
        y_prev = y;
        eps_prev = eps;
        h_prev = h;
        return y;
    }
};

}  // namespace

int main(int argc, char** argv) {
    const std::string out_path = argc > 1 ? argv[1] : "data/synthetic_returns.csv";
    const int n = 2100;
    const int burn = 500;
    const int break_row = 1155;  // 55% of the kept sample
    const double alpha0 = 0.30;
    const double beta_post = 1.25;

    copred::Rng rng = copred::Rng::stream(914007, {0});
    Margin asset(0.0005, 0.08, 2.0e-6, 0.06, 0.05, 0.88);
    Margin market(0.0004, 0.05, 1.5e-6, 0.06, 0.06, 0.87);

    std::vector<double> y1, y2;
    y1.reserve(n);
    y2.reserve(n);
    double prev_market = 0.0;
    for (int t = -burn; t < n; ++t) {
        const double z = prev_market < 0.0 ? 1.0 : 0.0;
        const double beta = t >= break_row ? beta_post : 0.0;
        const double rho = std::tanh(alpha0 + beta * z);
        const double e1 = rng.normal();
        const double e2 = rho * e1 + std::sqrt(1.0 - rho * rho) * rng.normal();
        const double ym = market.step(e2, 0.0);
        const double ya = asset.step(e1, -0.0008 * z);
        prev_market = ym;
        if (t >= 0) {
            y1.push_back(ya);
            y2.push_back(ym);
        }
    }

    std::FILE* f = std::fopen(out_path.c_str(), "wb");
    if (!f) {
        std::fprintf(stderr, "cannot write %s\n", out_path.c_str());
        return 1;
    }
    std::fprintf(f, "date,asset,market\n");
    Date date{2000, 1, 3};
    std::string break_date;
    for (int t = 0; t < n; ++t) {
        char day[16];
        std::snprintf(day, sizeof day, "%04u/%02u/%02u", static_cast<unsigned>(date.y) % 10000u,
                      static_cast<unsigned>(date.m) % 100u, static_cast<unsigned>(date.d) % 100u);
        if (t == break_row) break_date = day;
        std::fprintf(f, "%s,%.6f,%.6f\n", day, y1[static_cast<size_t>(t)],
                     y2[static_cast<size_t>(t)]);
        date.next_weekday();
    }
    std::fclose(f);
    std::printf("%s: %d rows, state coefficient jumps at row %d (%s)\n", out_path.c_str(), n,
                break_row, break_date.c_str());
    return 0;
}
