#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace patchdyn {

/// Parameters of the buy/sell market model. Jump sizes eps_plus > 0 > eps_minus,
/// news rates nu_ex in 1/time, feedback constant g couples the boundary
/// buy/sell rates back into the arrival frequencies.
struct ModelParams {
    double gamma = 1.0;
    double eps_plus = 0.075;
    double eps_minus = -0.072;
    double nu_ex_plus = 20.0;
    double nu_ex_minus = 20.0;
    double g = 40.0;

    void validate() const {
        if (gamma < 0.0) throw std::invalid_argument("gamma must be >= 0");
        if (!(eps_plus > 0.0)) throw std::invalid_argument("eps_plus must be > 0");
        if (!(eps_minus < 0.0)) throw std::invalid_argument("eps_minus must be < 0");
        if (nu_ex_plus < 0.0 || nu_ex_minus < 0.0)
            throw std::invalid_argument("nu_ex rates must be >= 0");
        if (g < 0.0) throw std::invalid_argument("g must be >= 0");
    }
};

/// Boundary outflow (buy/sell) rates per unit time per agent.
struct Rates {
    double r_plus = 0.0;
    double r_minus = 0.0;
};

/// Effective news-arrival frequencies including mean-field feedback.
struct NuPair {
    double nu_plus = 0.0;
    double nu_minus = 0.0;

    double total() const { return nu_plus + nu_minus; }
};

inline NuPair nu_rates(const ModelParams& p, const Rates& r) {
    return {p.nu_ex_plus + p.g * r.r_plus, p.nu_ex_minus + p.g * r.r_minus};
}

inline double drift_mu(const ModelParams& p, const NuPair& nu, double x) {
    return p.gamma * x - (nu.nu_plus * p.eps_plus + nu.nu_minus * p.eps_minus);
}

inline double sigma2(const ModelParams& p, const NuPair& nu) {
    return nu.nu_plus * p.eps_plus * p.eps_plus + nu.nu_minus * p.eps_minus * p.eps_minus;
}

/// (mu, sigma^2) at position x for the current rates.
inline std::pair<double, double> drift_diffusion(const ModelParams& p, const Rates& r,
                                                 double x) {
    const NuPair nu = nu_rates(p, r);
    return {drift_mu(p, nu, x), sigma2(p, nu)};
}

}  // namespace patchdyn
