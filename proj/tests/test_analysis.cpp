#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "patchdyn/analysis.hpp"

using namespace patchdyn;

TEST_CASE("fit_loglog on exact power laws") {
    {
        const std::vector<double> x{0.5, 0.25, 0.125, 0.0625};
        std::vector<double> y;
        for (double v : x) y.push_back(2.0 * v * v * v);
        const auto f = fit_loglog(x, y);
        CHECK(f.slope == doctest::Approx(3.0).epsilon(1e-12));
        CHECK(f.intercept == doctest::Approx(std::log(2.0)).epsilon(1e-10));
        CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(f.ci_lo == doctest::Approx(3.0).epsilon(1e-6));
        CHECK(f.ci_hi == doctest::Approx(3.0).epsilon(1e-6));
    }
    {
        // Flat data has slope zero.
        const std::vector<double> x{1.0, 2.0, 4.0, 8.0};
        const std::vector<double> y{0.7, 0.7, 0.7, 0.7};
        const auto f = fit_loglog(x, y);
        CHECK(f.slope == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    }
    {
        // Rescaling x multiplies nothing into the slope.
        const std::vector<double> x{0.1, 0.05, 0.025, 0.0125, 0.00625};
        std::vector<double> y;
        for (double v : x) y.push_back(5.0 * std::pow(v, 1.84) * (1.0 + 0.02 * std::sin(100 * v)));
        const auto f1 = fit_loglog(x, y);
        std::vector<double> x2;
        for (double v : x) x2.push_back(7.3 * v);
        const auto f2 = fit_loglog(x2, y);
        CHECK(f1.slope == doctest::Approx(f2.slope).epsilon(1e-10));
        CHECK(f1.ci_hi - f1.ci_lo == doctest::Approx(f2.ci_hi - f2.ci_lo).epsilon(1e-8));
    }
}

TEST_CASE("fit_loglog on tabulated convergence data") {
    // Errors halving-grid data with a known asymptotic slope near 1.84; the
    // confidence interval must bracket the point estimate.
    const std::vector<double> dx{2.0 / 21, 2.0 / 41, 2.0 / 81, 2.0 / 161, 2.0 / 321};
    const std::vector<double> err{2.59e-3, 6.61e-4, 1.73e-4, 4.64e-5, 1.31e-5};
    const auto f = fit_loglog(dx, err);
    CHECK(f.slope > 1.715);
    CHECK(f.slope < 1.964);
    CHECK(f.ci_lo < f.slope);
    CHECK(f.ci_hi > f.slope);
    CHECK(f.r2 > 0.999);
}

TEST_CASE("fit_loglog rejects degenerate input") {
    const std::vector<double> one{1.0};
    CHECK_THROWS(fit_loglog(one, one));
    const std::vector<double> x{1.0, 2.0, 3.0};
    const std::vector<double> bad{1.0, -2.0, 3.0};
    CHECK_THROWS(fit_loglog(x, bad));
}

TEST_CASE("footprint_average") {
    FvState s = make_fv_state(5);  // dx = 0.4
    s.cells = {1.0, 2.0, 3.0, 4.0, 5.0};

    // Whole cell.
    CHECK(footprint_average(s, -1.0, -0.6) == doctest::Approx(1.0).epsilon(1e-14));
    // Two half cells.
    CHECK(footprint_average(s, -0.8, -0.4) == doctest::Approx(1.5).epsilon(1e-14));
    // Partial overlap: 75% of cell 1, 25% of cell 2 by length.
    CHECK(footprint_average(s, -0.5, -0.1) ==
          doctest::Approx((0.3 * 2.0 + 0.1 * 3.0) / 0.4).epsilon(1e-13));
    // Averaging the whole domain equals the mean of the cells.
    CHECK(footprint_average(s, -1.0, 1.0) == doctest::Approx(3.0).epsilon(1e-13));
}

TEST_CASE("l2_errors") {
    const auto g = build_geometry(5, 0.2, 2, 2);
    FvState ref = make_fv_state(405);
    ref.cells.assign(405, 1.0);

    MacroState s;
    s.teeth.assign(g.n_teeth(), 1.0);
    s.gaps.assign(g.n_gaps(), 1.0);
    auto [et, eg] = l2_errors(s, ref, g);
    CHECK(et == doctest::Approx(0.0).scale(1.0).epsilon(1e-13));
    CHECK(eg == doctest::Approx(0.0).scale(1.0).epsilon(1e-13));

    // A single perturbed tooth of size e gives RMS e / sqrt(n_teeth).
    s.teeth[2] = 1.0 + 0.3;
    std::tie(et, eg) = l2_errors(s, ref, g);
    CHECK(et == doctest::Approx(0.3 / std::sqrt(6.0)).epsilon(1e-12));
    CHECK(eg == doctest::Approx(0.0).scale(1.0).epsilon(1e-13));
}

TEST_CASE("steady_state_compare") {
    const std::vector<double> a{1.0, 2.0, 3.0};
    const std::vector<double> b{1.0, 2.5, 3.0};
    const auto [l2, linf] = steady_state_compare(a, b);
    CHECK(l2 == doctest::Approx(0.5 / std::sqrt(3.0)).epsilon(1e-13));
    CHECK(linf == doctest::Approx(0.5).epsilon(1e-14));
    const auto [z2, zinf] = steady_state_compare(a, a);
    CHECK(z2 == 0.0);
    CHECK(zinf == 0.0);
}

TEST_CASE("gaussian_macro_state matches quadrature footprints") {
    const auto g = build_geometry(9, 0.2, 3, 3);
    const auto s = gaussian_macro_state(g, 1.5, 0.1, 0.25);
    auto f = [](double x) {
        const double z = (x - 0.1) / 0.25;
        return 1.5 * std::exp(-z * z);
    };
    CHECK(s.teeth[4] ==
          doctest::Approx(simpson_average(f, g.tooth_left(4), g.tooth_right(4)))
              .epsilon(1e-10));
    CHECK(s.gaps[2] ==
          doctest::Approx(simpson_average(f, g.gap_left(2), g.gap_right(2)))
              .epsilon(1e-10));
    // Total macro mass equals the integral of the profile on [-1, 1].
    double integral = 0.0;
    for (int k = 0; k < 200; ++k)
        integral += simpson_average(f, -1.0 + 0.01 * k, -1.0 + 0.01 * (k + 1)) * 0.01;
    CHECK(total_mass(s, g) == doctest::Approx(integral).epsilon(1e-9));
}

TEST_CASE("order study smoke run shows decreasing errors") {
    OrderStudyConfig cfg;
    cfg.params = {1.0, 0.075, -0.072, 20.0, 20.0, 40.0};
    cfg.n_ref = 963;
    cfg.ref_steps = 1000;
    cfg.workers = 2;
    const std::vector<int> ns{11, 15, 21};
    const auto res = run_order_study(2, ns, cfg);
    REQUIRE(res.rows.size() == 3);
    CHECK(res.rows[0].n == 11);
    CHECK(res.rows[2].n == 21);
    CHECK(res.rows[0].dx == doctest::Approx(2.0 / 11));
    CHECK(res.rows[2].err_teeth < res.rows[0].err_teeth);
    CHECK(res.rows[2].err_gaps < res.rows[0].err_gaps);
    CHECK(res.teeth_fit.slope > 1.0);
    CHECK(res.t_end > 0.0);
}
