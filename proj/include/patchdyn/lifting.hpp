#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "patchdyn/geometry.hpp"

namespace patchdyn {

/// Quadratic density reconstruction u(x) = a0 + a1*x + a2*x^2/2 in local
/// coordinates centered at the tooth center, valid over the simulation-unit
/// footprint [x_left, x_right].
struct QuadraticReconstruction {
    double a0 = 0.0;
    double a1 = 0.0;
    double a2 = 0.0;
    double x_left = 0.0;
    double x_right = 0.0;

    double eval(double x) const { return a0 + a1 * x + 0.5 * a2 * x * x; }

    /// Exact average over [xl, xr] from closed-form monomial integrals.
    double average(double xl, double xr) const {
        const double mid = 0.5 * (xl + xr);
        const double q = (xr * xr * xr - xl * xl * xl) / (3.0 * (xr - xl));
        return a0 + a1 * mid + 0.5 * a2 * q;
    }
};

/// Quadratic matching the tooth average and the averages of both neighboring
/// gaps (teeth 1..N-1). Built from exact monomial integrals, no quadrature.
QuadraticReconstruction lift_interior(double u_gap_left, double u_tooth,
                                      double u_gap_right, const PatchGeometry& geom);

/// Boundary variants: point value 0 at the outer domain edge, tooth average,
/// and the single adjacent gap average over the boundary gap (dx - 3H/2).
QuadraticReconstruction lift_left_boundary(double u_tooth0, double u_gap_half,
                                           const PatchGeometry& geom);
QuadraticReconstruction lift_right_boundary(double u_toothN, double u_gap_half,
                                            const PatchGeometry& geom);

/// Exact bin averages of the reconstruction over n_bins bins of width h
/// starting at local coordinate x_left.
std::vector<double> fine_bin_averages(const QuadraticReconstruction& rec,
                                      double x_left, int n_bins, double h);

/// Integer agent counts per bin by largest-remainder apportionment of
/// n_total * max(bin, 0) * h. Negative bin densities are clipped; the clipped
/// mass is reported for diagnostics.
struct Apportionment {
    std::vector<std::int64_t> counts;
    double clipped_mass = 0.0;
};

Apportionment apportion_agents(std::span<const double> bin_densities, double h,
                               double n_total);

}  // namespace patchdyn
