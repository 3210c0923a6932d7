#pragma once

// Monte Carlo driver for the simulation study: per replicate it simulates a
// scenario, fits both margins, evaluates the lower and upper diagonal
// regions, and calibrates all three statistics with one shared moving block
// bootstrap. Results are tabulated as rejection frequencies.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "copred/bootstrap.hpp"
#include "copred/dgp.hpp"

namespace copred {

struct McConfig {
    BootstrapConfig bootstrap{};  // per-replicate calibration settings
    double level = 0.05;
    int threads = 0;              // parallelism across replicates
    std::uint64_t seed = 20260819;
    double grid_step = 0.05;
    int s_stride = 1;
};

struct McRow {
    std::string region;     // "lower" | "upper"
    std::string statistic;  // "delta1" | "delta2" | "t"
    int n = 0;
    std::string scenario;
    double rejection_rate = 0.0;
    int reps = 0;      // replicates entering the denominator
    int failures = 0;  // replicates excluded after exhausting redraws
};

struct McTable {
    std::vector<McRow> rows;
    // Throws std::out_of_range when the cell is absent.
    const McRow& at(const std::string& region, const std::string& statistic,
                    const std::string& scenario, int n) const;
};

// Rejection frequencies at cfg.level for every scenario x n x region x
// statistic. Every replicate owns streams derived from (cfg.seed, scenario,
// n, replicate), so the table is bit-identical under any thread count.
// Requires reps >= 100; replicates whose pipeline fails are excluded from
// the denominator and counted per cell.
McTable run_mc_experiment(const std::vector<ScenarioSpec>& scenarios,
                          const std::vector<int>& n_list, int reps, const McConfig& cfg);

// One header plus one row per table cell, shortest round-trip numbers.
void write_mc_csv(const McTable& table, std::ostream& out);

}  // namespace copred
