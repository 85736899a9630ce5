#include "patchdyn/fv.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace patchdyn {

FvState make_fv_state(int n_cells) {
    if (n_cells < 3 || n_cells % 2 == 0)
        throw std::invalid_argument("FV cell count must be odd and >= 3");
    FvState s;
    s.cells.assign(n_cells, 0.0);
    s.dx_f = 2.0 / n_cells;
    return s;
}

Rates boundary_rates(const FvState& state, double s2) {
    if (state.n() < 3) throw std::invalid_argument("need at least 3 cells");
    return {s2 * state.cells[state.n() - 1] / state.dx_f,
            s2 * state.cells[0] / state.dx_f};
}

double fv_mass(const FvState& state) {
    double sum = 0.0;
    for (double u : state.cells) sum += u;
    return sum * state.dx_f;
}

double fv_stable_dt(const FvState& state, const ModelParams& params) {
    const NuPair nu = nu_rates(params, state.rates);
    const double s2 = sigma2(params, nu);
    const double mu_max =
        std::max(std::abs(drift_mu(params, nu, -1.0)), std::abs(drift_mu(params, nu, 1.0)));
    double bound = state.dx_f * state.dx_f / std::max(s2, 1e-300);
    if (mu_max > 0.0) bound = std::min(bound, state.dx_f / (2.0 * mu_max));
    return bound;
}

void fv_step(FvState& state, const ModelParams& params, double dt, int workers) {
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
    const double bound = fv_stable_dt(state, params);
    if (dt > bound * (1.0 + 1e-12))
        throw std::invalid_argument("dt " + std::to_string(dt) +
                                    " above stability bound " + std::to_string(bound));

    const int n = state.n();
    const double dx = state.dx_f;
    const NuPair nu = nu_rates(params, state.rates);
    const double s2 = sigma2(params, nu);
    const Rates r = boundary_rates(state, s2);

    static thread_local std::vector<double> flux_buf;
    flux_buf.resize(n + 1);
    double* flux = flux_buf.data();
    flux[0] = -r.r_minus;
    flux[n] = r.r_plus;
    const double* u = state.cells.data();
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (workers > 1) num_threads(workers)
#endif
    for (int i = 1; i < n; ++i)
        flux[i] = edge_flux(u[i - 1], u[i], drift_mu(params, nu, state.x_edge(i)), s2, dx);

    const double lam = dt / dx;
    double check = 0.0;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) reduction(+ : check) if (workers > 1) \
    num_threads(workers)
#endif
    for (int i = 0; i < n; ++i) {
        state.cells[i] += lam * (flux[i] - flux[i + 1]);
        check += state.cells[i];
    }
    state.cells[state.central_cell()] += lam * (r.r_plus + r.r_minus);

    if (!std::isfinite(check))
        throw std::runtime_error("fv_step produced non-finite densities at t = " +
                                 std::to_string(state.time));

    state.rates = r;
    state.time += dt;
}

void run_to_time(FvState& state, const ModelParams& params, double dt, double t_end,
                 int workers) {
    const double span = t_end - state.time;
    if (span < -1e-12 * std::max(1.0, std::abs(t_end)))
        throw std::invalid_argument("t_end lies in the past");
    const double steps_exact = span / dt;
    const long long steps = std::llround(steps_exact);
    if (std::abs(steps_exact - static_cast<double>(steps)) > 1e-6)
        throw std::invalid_argument("t_end - t must be an integer multiple of dt");
    for (long long k = 0; k < steps; ++k) fv_step(state, params, dt, workers);
}

double simpson_average(const std::function<double(double)>& f, double xl, double xr) {
    constexpr int kSub = 16;
    const double h = (xr - xl) / kSub;
    double sum = f(xl) + f(xr);
    for (int j = 1; j < kSub; ++j) sum += (j % 2 ? 4.0 : 2.0) * f(xl + j * h);
    return sum * h / 3.0 / (xr - xl);
}

std::vector<double> gaussian_cell_averages(int n_cells, double a, double b, double c) {
    const double dx = 2.0 / n_cells;
    auto f = [&](double x) {
        const double z = (x - b) / c;
        return a * std::exp(-z * z);
    };
    std::vector<double> avg(n_cells);
    for (int i = 0; i < n_cells; ++i)
        avg[i] = simpson_average(f, -1.0 + i * dx, -1.0 + (i + 1) * dx);
    return avg;
}

void run_to_steady(FvState& state, const ModelParams& params, double dt, double tol,
                   double check_interval, double t_max, int workers) {
    const long long chunk = std::max<long long>(1, std::llround(check_interval / dt));
    std::vector<double> prev = state.cells;
    while (state.time < t_max) {
        for (long long k = 0; k < chunk; ++k) fv_step(state, params, dt, workers);
        double diff = 0.0;
        for (int i = 0; i < state.n(); ++i)
            diff = std::max(diff, std::abs(state.cells[i] - prev[i]));
        if (diff / (chunk * dt) < tol) return;
        prev = state.cells;
    }
}

}  // namespace patchdyn
