#include "patchdyn/lifting.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace patchdyn {

namespace {

using Mat3 = std::array<std::array<double, 3>, 3>;
using Vec3 = std::array<double, 3>;

// Row of the linear system: averages of the monomials {1, x, x^2/2} over [xl, xr].
Vec3 average_row(double xl, double xr) {
    const double mid = 0.5 * (xl + xr);
    const double q = (xr * xr * xr - xl * xl * xl) / (3.0 * (xr - xl));
    return {1.0, mid, 0.5 * q};
}

// Point-value row: {1, x, x^2/2} at x.
Vec3 point_row(double x) { return {1.0, x, 0.5 * x * x}; }

Vec3 solve3(const Mat3& a, const Vec3& b) {
    const double det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
                       a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
                       a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    Mat3 inv;
    inv[0][0] = a[1][1] * a[2][2] - a[1][2] * a[2][1];
    inv[0][1] = a[0][2] * a[2][1] - a[0][1] * a[2][2];
    inv[0][2] = a[0][1] * a[1][2] - a[0][2] * a[1][1];
    inv[1][0] = a[1][2] * a[2][0] - a[1][0] * a[2][2];
    inv[1][1] = a[0][0] * a[2][2] - a[0][2] * a[2][0];
    inv[1][2] = a[0][2] * a[1][0] - a[0][0] * a[1][2];
    inv[2][0] = a[1][0] * a[2][1] - a[1][1] * a[2][0];
    inv[2][1] = a[0][1] * a[2][0] - a[0][0] * a[2][1];
    inv[2][2] = a[0][0] * a[1][1] - a[0][1] * a[1][0];

    double norm_a = 0.0, norm_inv = 0.0;
    for (int i = 0; i < 3; ++i) {
        double ra = 0.0, ri = 0.0;
        for (int j = 0; j < 3; ++j) {
            ra += std::abs(a[i][j]);
            ri += std::abs(inv[i][j] / det);
        }
        norm_a = std::max(norm_a, ra);
        norm_inv = std::max(norm_inv, ri);
    }
    if (!std::isfinite(det) || norm_a * norm_inv > 1e12)
        throw std::runtime_error("lifting system is ill-conditioned (cond > 1e12)");

    Vec3 x{};
    for (int i = 0; i < 3; ++i)
        x[i] = (inv[i][0] * b[0] + inv[i][1] * b[1] + inv[i][2] * b[2]) / det;
    return x;
}

}  // namespace

QuadraticReconstruction lift_interior(double u_gap_left, double u_tooth,
                                      double u_gap_right, const PatchGeometry& geom) {
    const double h = 0.5 * geom.tooth_width;
    const double d = geom.dx - h;
    const Mat3 a = {average_row(-d, -h), average_row(-h, h), average_row(h, d)};
    const Vec3 c = solve3(a, {u_gap_left, u_tooth, u_gap_right});
    const double half_unit = 0.5 * geom.alpha * geom.dx;
    return {c[0], c[1], c[2], -half_unit, half_unit};
}

QuadraticReconstruction lift_left_boundary(double u_tooth0, double u_gap_half,
                                           const PatchGeometry& geom) {
    // Local origin at the tooth center -1 + H/2; the domain edge is at -H/2.
    const double h = 0.5 * geom.tooth_width;
    const Mat3 a = {point_row(-h), average_row(-h, h),
                    average_row(h, geom.dx - geom.tooth_width)};
    const Vec3 c = solve3(a, {0.0, u_tooth0, u_gap_half});
    return {c[0], c[1], c[2], -h, -h + (geom.n_t + geom.n_b) * geom.h_fine};
}

QuadraticReconstruction lift_right_boundary(double u_toothN, double u_gap_half,
                                            const PatchGeometry& geom) {
    const double h = 0.5 * geom.tooth_width;
    const Mat3 a = {average_row(-(geom.dx - geom.tooth_width), -h),
                    average_row(-h, h), point_row(h)};
    const Vec3 c = solve3(a, {u_gap_half, u_toothN, 0.0});
    return {c[0], c[1], c[2], h - (geom.n_t + geom.n_b) * geom.h_fine, h};
}

std::vector<double> fine_bin_averages(const QuadraticReconstruction& rec,
                                      double x_left, int n_bins, double h) {
    std::vector<double> bins(n_bins);
    for (int j = 0; j < n_bins; ++j)
        bins[j] = rec.average(x_left + j * h, x_left + (j + 1) * h);
    return bins;
}

Apportionment apportion_agents(std::span<const double> bin_densities, double h,
                               double n_total) {
    if (!(n_total > 0.0)) throw std::invalid_argument("n_total must be > 0");
    const int n = static_cast<int>(bin_densities.size());
    Apportionment out;
    out.counts.assign(n, 0);

    std::vector<double> target(n);
    double total = 0.0;
    for (int j = 0; j < n; ++j) {
        const double d = bin_densities[j];
        if (d < 0.0) out.clipped_mass += -d * h;
        target[j] = n_total * std::max(d, 0.0) * h;
        total += target[j];
    }
    const auto want = static_cast<std::int64_t>(std::llround(total));

    std::int64_t assigned = 0;
    std::vector<std::pair<double, int>> rem(n);
    for (int j = 0; j < n; ++j) {
        out.counts[j] = static_cast<std::int64_t>(std::floor(target[j]));
        assigned += out.counts[j];
        rem[j] = {target[j] - std::floor(target[j]), j};
    }
    // Largest fractional remainders first; ties broken by lower bin index.
    std::sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (int k = 0; assigned < want && k < n; ++k, ++assigned) ++out.counts[rem[k].second];
    return out;
}

}  // namespace patchdyn
