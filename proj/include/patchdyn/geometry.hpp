#pragma once

#include <vector>

namespace patchdyn {

/// Two-scale spatial layout over [-1, 1]: N big cells, N+1 teeth sitting at the
/// cell edges, N gaps between them. Each tooth plus its two buffers forms a
/// simulation unit of width alpha*dx, subdivided into n_t + 2*n_b fine bins.
/// Boundary teeth keep full width H but sit flush with x = -1 / x = +1, so the
/// two outermost gaps are narrower (dx - 3H/2) than interior ones (dx - H).
struct PatchGeometry {
    int n_cells = 0;
    double dx = 0.0;
    double alpha = 0.0;
    int n_t = 0;
    int n_b = 0;
    double h_fine = 0.0;
    double tooth_width = 0.0;
    double gap_width_interior = 0.0;
    double gap_width_boundary = 0.0;
    std::vector<double> tooth_centers;  // cell-edge coordinates x_i = -1 + i*dx

    int n_teeth() const { return n_cells + 1; }
    int n_gaps() const { return n_cells; }

    // Index of the gap containing x = 0 (n_cells is odd, so no tooth does).
    int central_gap() const { return (n_cells - 1) / 2; }

    double gap_width(int g) const {
        return (g == 0 || g == n_cells - 1) ? gap_width_boundary : gap_width_interior;
    }

    // Tooth footprints. Boundary teeth are flush with the domain ends.
    double tooth_left(int i) const {
        if (i == 0) return -1.0;
        if (i == n_cells) return 1.0 - tooth_width;
        return tooth_centers[i] - 0.5 * tooth_width;
    }
    double tooth_right(int i) const { return tooth_left(i) + tooth_width; }

    double gap_left(int g) const { return tooth_right(g); }
    double gap_right(int g) const { return tooth_left(g + 1); }
};

PatchGeometry build_geometry(int n_cells, double alpha, int n_t, int n_b);

/// Averaged densities in teeth and gaps; the coarse variable of the scheme.
struct MacroState {
    std::vector<double> teeth;  // N+1
    std::vector<double> gaps;   // N
    double time = 0.0;
};

double total_mass(const MacroState& state, const PatchGeometry& geom);

}  // namespace patchdyn
