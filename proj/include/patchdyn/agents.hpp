#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "patchdyn/model.hpp"
#include "patchdyn/rng.hpp"

namespace patchdyn {

/// One replica of the market: per-agent states in (-1, 1). Densities are
/// normalized by n_total, so a population holding all n_total agents has unit
/// mass. Boundary crossings are counted as buys/sells and the agent is put
/// back near the neutral state.
struct AgentPopulation {
    std::vector<double> states;
    ModelParams params;
    std::mt19937_64 rng;
    std::int64_t buys = 0;    // events in the current reporting window
    std::int64_t sells = 0;
    double n_total = 1.0;     // nominal agent count for rate normalization
    double reinjection_offset = 1e-3;
};

struct RateReport {
    double r_plus = 0.0;
    double r_minus = 0.0;
};

struct CrossingCounts {
    std::int64_t buys = 0;
    std::int64_t sells = 0;
};

/// One micro step: exact exponential decay toward 0, then an exact-Poisson
/// number of news jumps applied sequentially; crossings of +-1 are counted and
/// the agent is reinjected at 0 plus a small uniform offset.
CrossingCounts agent_step(AgentPopulation& pop, const RateReport& rates, double dt);

/// Window event counts normalized per agent per unit time; resets the counters.
RateReport report_rates(AgentPopulation& pop, double elapsed);

/// Densities per bin: count / (n_total * bin width).
std::vector<double> density_histogram(const AgentPopulation& pop,
                                      std::span<const double> bin_edges);

}  // namespace patchdyn
