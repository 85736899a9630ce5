#pragma once

#include <functional>
#include <vector>

#include "patchdyn/model.hpp"

namespace patchdyn {

/// Full-domain cell-average density on a uniform grid over [-1, 1].
/// The cell count is odd so exactly one cell contains x = 0; that cell
/// receives the reinjection source. `rates` holds the boundary buy/sell
/// rates computed at the last completed step (explicit lagged feedback).
struct FvState {
    std::vector<double> cells;
    double dx_f = 0.0;
    double time = 0.0;
    Rates rates;

    int n() const { return static_cast<int>(cells.size()); }
    int central_cell() const { return (n() - 1) / 2; }
    double x_center(int i) const { return -1.0 + (i + 0.5) * dx_f; }
    double x_edge(int i) const { return -1.0 + i * dx_f; }
};

FvState make_fv_state(int n_cells);

/// Flux through a cell edge, positive rightward:
/// F = -( mu * (u_l + u_r)/2 + (sigma^2/2) * (u_r - u_l)/dx ).
inline double edge_flux(double u_left, double u_right, double mu_edge, double s2,
                        double dx_f) {
    return -(mu_edge * 0.5 * (u_left + u_right) +
             0.5 * s2 * (u_right - u_left) / dx_f);
}

/// Boundary outflow magnitudes from the outermost cells:
/// R- = s2 * U_{1/2} / dx (left, so F_0 = -R-), R+ = s2 * U_{N-1/2} / dx.
Rates boundary_rates(const FvState& state, double s2);

double fv_mass(const FvState& state);

/// Largest explicit step allowed at the state's current rates.
double fv_stable_dt(const FvState& state, const ModelParams& params);

/// One forward-Euler step of the flux-form update including boundary fluxes
/// and the lumped central-cell reinjection source. Conserves mass exactly.
void fv_step(FvState& state, const ModelParams& params, double dt, int workers = 1);

/// Repeated fv_step; t_end - time must be an integer multiple of dt.
void run_to_time(FvState& state, const ModelParams& params, double dt, double t_end,
                 int workers = 1);

/// Cell averages of a * exp(-((x-b)/c)^2) via composite Simpson,
/// 16 subintervals per cell.
std::vector<double> gaussian_cell_averages(int n_cells, double a, double b, double c);

/// Exact average of f over [xl, xr], composite Simpson with 16 subintervals.
double simpson_average(const std::function<double(double)>& f, double xl, double xr);

/// Advance until the profile change per unit time drops below tol (L-inf of
/// dU/dt), checking every `check_interval` of simulated time. Gives up at t_max.
void run_to_steady(FvState& state, const ModelParams& params, double dt, double tol,
                   double check_interval, double t_max, int workers = 1);

}  // namespace patchdyn
