#include "patchdyn/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace patchdyn {

PatchGeometry build_geometry(int n_cells, double alpha, int n_t, int n_b) {
    if (n_cells < 3 || n_cells % 2 == 0)
        throw std::invalid_argument("n_cells must be odd and >= 3, got " +
                                    std::to_string(n_cells));
    if (n_t < 1 || n_b < 1)
        throw std::invalid_argument("n_t and n_b must be >= 1");
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");

    PatchGeometry g;
    g.n_cells = n_cells;
    g.dx = 2.0 / n_cells;
    g.alpha = alpha;
    g.n_t = n_t;
    g.n_b = n_b;
    g.h_fine = alpha * g.dx / (n_t + 2 * n_b);
    g.tooth_width = n_t * g.h_fine;
    g.gap_width_interior = g.dx - g.tooth_width;
    g.gap_width_boundary = g.dx - 1.5 * g.tooth_width;

    if (!(g.gap_width_boundary > 0.0))
        throw std::invalid_argument(
            "boundary gap width <= 0: need tooth width H < (2/3) dx, i.e. "
            "alpha < (2/3)*(n_t + 2 n_b)/n_t");

    g.tooth_centers.resize(n_cells + 1);
    for (int i = 0; i <= n_cells; ++i) g.tooth_centers[i] = -1.0 + i * g.dx;
    return g;
}

double total_mass(const MacroState& state, const PatchGeometry& geom) {
    if (static_cast<int>(state.teeth.size()) != geom.n_teeth() ||
        static_cast<int>(state.gaps.size()) != geom.n_gaps())
        throw std::invalid_argument("state dimensions do not match geometry");

    double mass = 0.0;
    for (double u : state.teeth) mass += geom.tooth_width * u;
    for (int g = 0; g < geom.n_gaps(); ++g) mass += geom.gap_width(g) * state.gaps[g];
    return mass;
}

}  // namespace patchdyn
