#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "patchdyn/fv.hpp"
#include "patchdyn/lifting.hpp"

using namespace patchdyn;

namespace {

// Quadrature oracle: average of f over [xl, xr] by composite Simpson.
double avg_of(const std::function<double(double)>& f, double xl, double xr) {
    return simpson_average(f, xl, xr);
}

struct Poly {
    double c0, c1, c2;  // c0 + c1 x + c2 x^2
    double operator()(double x) const { return c0 + c1 * x + c2 * x * x; }
};

// Averages of a polynomial over the three windows the interior lift matches:
// left gap [-D, -h], tooth [-h, h], right gap [h, D], local coordinates.
QuadraticReconstruction lift_from_poly(const Poly& f, const PatchGeometry& g) {
    const double h = 0.5 * g.tooth_width;
    const double D = g.dx - h;
    return lift_interior(avg_of(f, -D, -h), avg_of(f, -h, h), avg_of(f, h, D), g);
}

}  // namespace

TEST_CASE("interior lift reproduces constants, lines, and parabolas") {
    const auto g = build_geometry(11, 0.2, 4, 4);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    for (int trial = 0; trial < 200; ++trial) {
        const Poly f{coef(rng), coef(rng), coef(rng)};
        const auto rec = lift_from_poly(f, g);
        for (double x : {-0.03, -0.004, 0.0, 0.011, 0.04}) {
            CHECK(rec.eval(x) == doctest::Approx(f(x)).epsilon(1e-9));
        }
    }
}

TEST_CASE("interior lift specific coefficients") {
    const auto g = build_geometry(11, 0.2, 4, 4);
    // Pure constant.
    auto rec = lift_interior(0.7, 0.7, 0.7, g);
    CHECK(rec.a0 == doctest::Approx(0.7).epsilon(1e-13));
    CHECK(rec.a1 == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(rec.a2 == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
    // Pure line x: tooth average 0, gap averages +-(D+h)/2.
    const double h = 0.5 * g.tooth_width;
    const double D = g.dx - h;
    rec = lift_interior(-(D + h) / 2, 0.0, (D + h) / 2, g);
    CHECK(rec.a0 == doctest::Approx(0.0).scale(1.0).epsilon(1e-13));
    CHECK(rec.a1 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("boundary lifts match their constraints") {
    const auto g = build_geometry(11, 0.2, 4, 4);
    const double h = 0.5 * g.tooth_width;
    const double gap_b = g.gap_width(0) == g.dx - 1.5 * g.tooth_width
                             ? g.gap_width(0)
                             : g.dx - 1.5 * g.tooth_width;

    const auto rec = lift_left_boundary(0.4, 0.9, g);
    // Wall value zero at the outer edge of the tooth.
    CHECK(rec.eval(-h) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    // Tooth average reproduced.
    CHECK(rec.average(-h, h) == doctest::Approx(0.4).epsilon(1e-12));
    // Adjacent gap average reproduced.
    CHECK(rec.average(h, h + gap_b) == doctest::Approx(0.9).epsilon(1e-12));

    const auto recr = lift_right_boundary(0.4, 0.9, g);
    CHECK(recr.eval(h) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(recr.average(-h, h) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(recr.average(-h - gap_b, -h) == doctest::Approx(0.9).epsilon(1e-12));
    // Mirror symmetry.
    CHECK(recr.a0 == doctest::Approx(rec.a0).epsilon(1e-12));
    CHECK(recr.a1 == doctest::Approx(-rec.a1).epsilon(1e-12));
    CHECK(recr.a2 == doctest::Approx(rec.a2).epsilon(1e-10));
}

TEST_CASE("fine_bin_averages") {
    QuadraticReconstruction rec{1.0, 0.0, 2.0, -1.0, 1.0};  // 1 + x^2
    const auto bins = fine_bin_averages(rec, 0.0, 4, 0.25);
    for (int i = 0; i < 4; ++i) {
        const double xl = i * 0.25, xr = xl + 0.25;
        // Closed-form bin average of 1 + x^2.
        const double expect = 1.0 + (xr * xr * xr - xl * xl * xl) / (3 * 0.25);
        CHECK(bins[i] == doctest::Approx(expect).epsilon(1e-14));
    }
    // Bin averages recombine to the window average.
    double sum = 0.0;
    for (double b : bins) sum += b;
    CHECK(sum / 4 == doctest::Approx(rec.average(0.0, 1.0)).epsilon(1e-13));
}

TEST_CASE("restriction after lifting is the identity on tooth averages") {
    const auto g = build_geometry(9, 0.25, 3, 3);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.1, 2.0);
    const double h = 0.5 * g.tooth_width;
    for (int trial = 0; trial < 50; ++trial) {
        const double gl = u(rng), ut = u(rng), gr = u(rng);
        const auto rec = lift_interior(gl, ut, gr, g);
        CHECK(rec.average(-h, h) == doctest::Approx(ut).epsilon(1e-11));
        const double D = g.dx - h;
        CHECK(rec.average(-D, -h) == doctest::Approx(gl).epsilon(1e-11));
        CHECK(rec.average(h, D) == doctest::Approx(gr).epsilon(1e-11));
    }
}

TEST_CASE("lifting error constant for smooth profiles") {
    // For u(x) = sum v_k x^k/k!, the slope mismatch a1 - u'(0) of the
    // three-average quadratic fit is (D^2 + h^2) * v3 / 12 at leading order.
    // Verified against a quadrature oracle on a pure cubic, then the max-error
    // slope on a full smooth profile as the cell size shrinks.
    auto cubic = [](double x) { return x * x * x / 6.0; };  // v3 = 1

    auto slope_mismatch = [&](int n_cells) {
        const auto g = build_geometry(n_cells, 0.3, 2, 2);
        const double h = 0.5 * g.tooth_width;
        const double D = g.dx - h;
        const auto rec = lift_interior(avg_of(cubic, -D, -h), avg_of(cubic, -h, h),
                                       avg_of(cubic, h, D), g);
        struct {
            double err, D, h;
        } out{rec.a1 - 0.0, D, h};
        return out;
    };

    for (int n : {5, 9, 17, 33}) {
        const auto m = slope_mismatch(n);
        const double predicted = (m.D * m.D + m.h * m.h) * 1.0 / 12.0;
        CHECK(std::abs(m.err) == doctest::Approx(predicted).epsilon(1e-6));
    }

    // Max pointwise error over the tooth decays with third order in dx for a
    // generic smooth profile.
    auto smooth = [](double x) { return std::exp(std::sin(3.0 * x)); };
    std::vector<double> dxs, errs;
    for (int n : {9, 27, 81}) {
        const auto g = build_geometry(n, 0.3, 2, 2);
        const double h = 0.5 * g.tooth_width;
        const double D = g.dx - h;
        const double x0 = 0.25;  // expand around an off-center tooth location
        auto f = [&](double x) { return smooth(x0 + x); };
        const auto rec = lift_interior(avg_of(f, -D, -h), avg_of(f, -h, h),
                                       avg_of(f, h, D), g);
        double emax = 0.0;
        for (int k = 0; k <= 40; ++k) {
            const double x = -h + 2 * h * k / 40.0;
            emax = std::max(emax, std::abs(rec.eval(x) - f(x)));
        }
        dxs.push_back(g.dx);
        errs.push_back(emax);
    }
    const double slope01 = std::log(errs[0] / errs[1]) / std::log(dxs[0] / dxs[1]);
    const double slope12 = std::log(errs[1] / errs[2]) / std::log(dxs[1] / dxs[2]);
    CHECK(slope01 >= 2.7);
    CHECK(slope12 >= 2.7);
}

TEST_CASE("apportion_agents") {
    {
        const std::vector<double> dens{0.2, 0.5, 0.3};
        const auto a = apportion_agents(dens, 1.0, 10.0);
        CHECK(a.counts == std::vector<std::int64_t>{2, 5, 3});
        CHECK(a.clipped_mass == 0.0);
    }
    {
        // Remainders force rounding; counts must still sum to the rounded total.
        const std::vector<double> dens{1.0 / 3, 1.0 / 3, 1.0 / 3};
        const auto a = apportion_agents(dens, 1.0, 100.0);
        std::int64_t total = 0;
        for (auto c : a.counts) total += c;
        CHECK(total == 100);
        for (auto c : a.counts) CHECK((c == 33 || c == 34));
    }
    {
        // Negative densities are clipped and reported.
        const std::vector<double> dens{-0.1, 0.6, 0.5};
        const auto a = apportion_agents(dens, 1.0, 10.0);
        CHECK(a.counts[0] == 0);
        CHECK(a.clipped_mass == doctest::Approx(0.1).epsilon(1e-13));
        std::int64_t total = 0;
        for (auto c : a.counts) total += c;
        CHECK(total == 11);  // round(1.1 * 10)
    }
    {
        // Random cases: totals always match the rounded positive mass.
        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> u(-0.2, 1.5);
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<double> dens(7);
            for (auto& d : dens) d = u(rng);
            const double h = 0.01;
            const auto a = apportion_agents(dens, h, 5000.0);
            double want = 0.0;
            for (double d : dens) want += std::max(d, 0.0) * h * 5000.0;
            std::int64_t total = 0;
            for (auto c : a.counts) total += c;
            CHECK(total == std::llround(want));
        }
    }
}
