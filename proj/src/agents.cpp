#include "patchdyn/agents.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace patchdyn {

CrossingCounts agent_step(AgentPopulation& pop, const RateReport& rates, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
    if (pop.params.gamma * dt >= 1.0)
        throw std::invalid_argument("gamma*dt must be < 1");

    const NuPair nu = nu_rates(pop.params, {rates.r_plus, rates.r_minus});
    const double nu_tot = nu.total();
    const double p_good = nu_tot > 0.0 ? nu.nu_plus / nu_tot : 0.0;
    const double decay = std::exp(-pop.params.gamma * dt);
    const double mean_arrivals = nu_tot * dt;

    CrossingCounts step{};
    for (double& x : pop.states) {
        x *= decay;
        const long k = nu_tot > 0.0 ? poisson_draw(mean_arrivals, pop.rng) : 0;
        for (long j = 0; j < k; ++j) {
            x += (uniform01(pop.rng) < p_good) ? pop.params.eps_plus
                                               : pop.params.eps_minus;
            if (x > 1.0) {
                ++step.buys;
                x = (2.0 * uniform01(pop.rng) - 1.0) * pop.reinjection_offset;
            } else if (x < -1.0) {
                ++step.sells;
                x = (2.0 * uniform01(pop.rng) - 1.0) * pop.reinjection_offset;
            }
        }
        if (!std::isfinite(x))
            throw std::runtime_error("agent state became non-finite");
    }
    pop.buys += step.buys;
    pop.sells += step.sells;
    return step;
}

RateReport report_rates(AgentPopulation& pop, double elapsed) {
    if (!(elapsed > 0.0)) throw std::invalid_argument("elapsed must be > 0");
    RateReport r{static_cast<double>(pop.buys) / (pop.n_total * elapsed),
                 static_cast<double>(pop.sells) / (pop.n_total * elapsed)};
    pop.buys = 0;
    pop.sells = 0;
    return r;
}

std::vector<double> density_histogram(const AgentPopulation& pop,
                                      std::span<const double> bin_edges) {
    const int n_bins = static_cast<int>(bin_edges.size()) - 1;
    if (n_bins < 1) throw std::invalid_argument("need at least two bin edges");
    for (int j = 0; j < n_bins; ++j)
        if (!(bin_edges[j + 1] > bin_edges[j]))
            throw std::invalid_argument("bin edges must be strictly increasing");

    std::vector<double> density(n_bins, 0.0);
    for (double x : pop.states) {
        const auto it = std::upper_bound(bin_edges.begin(), bin_edges.end(), x);
        const int j = static_cast<int>(it - bin_edges.begin()) - 1;
        if (j >= 0 && j < n_bins) density[j] += 1.0;
    }
    for (int j = 0; j < n_bins; ++j)
        density[j] /= pop.n_total * (bin_edges[j + 1] - bin_edges[j]);
    return density;
}

}  // namespace patchdyn
