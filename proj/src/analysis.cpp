#include "patchdyn/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "patchdyn/patch.hpp"

namespace patchdyn {

namespace {

// Two-sided 97.5% quantiles of the t distribution, dof 1..30.
constexpr double kT975[] = {
    12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
    2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
    2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};

double t_quantile_975(int dof) {
    if (dof < 1) throw std::invalid_argument("dof must be >= 1");
    return dof <= 30 ? kT975[dof - 1] : 1.960;
}

}  // namespace

FitResult fit_loglog(std::span<const double> x, std::span<const double> y) {
    const int n = static_cast<int>(x.size());
    if (n < 3 || y.size() != x.size())
        throw std::invalid_argument("fit_loglog needs >= 3 points");

    std::vector<double> lx(n), ly(n);
    for (int i = 0; i < n; ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0))
            throw std::invalid_argument("fit_loglog needs positive data");
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    double mx = 0.0, my = 0.0;
    for (int i = 0; i < n; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (int i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("degenerate x values");

    FitResult fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    const double ss_res = std::max(0.0, syy - fit.slope * sxy);
    fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    const double se = std::sqrt(ss_res / (n - 2) / sxx);
    const double t = t_quantile_975(n - 2);
    fit.ci_lo = fit.slope - t * se;
    fit.ci_hi = fit.slope + t * se;
    return fit;
}

double footprint_average(const FvState& ref, double a, double b) {
    if (!(b > a)) throw std::invalid_argument("empty footprint");
    const double dx = ref.dx_f;
    const int n = ref.n();
    // Piecewise-linear reconstruction with central slopes: footprints narrower
    // than a cell would otherwise pick up first-order sampling noise, which
    // would swamp a second-order comparison. Each cell's reconstruction
    // integrates back to its own average, so tiling footprints stay
    // conservative; partial-cell overlaps are integrated exactly.
    auto slope = [&](int i) {
        if (i == 0) return (ref.cells[1] - ref.cells[0]) / dx;
        if (i == n - 1) return (ref.cells[n - 1] - ref.cells[n - 2]) / dx;
        return (ref.cells[i + 1] - ref.cells[i - 1]) / (2.0 * dx);
    };
    double sum = 0.0;
    const int i_lo = std::max(0, static_cast<int>(std::floor((a + 1.0) / dx)));
    const int i_hi = std::min(n - 1, static_cast<int>(std::floor((b + 1.0) / dx - 1e-12)));
    for (int i = i_lo; i <= i_hi; ++i) {
        const double cl = std::max(a, ref.x_edge(i));
        const double cr = std::min(b, ref.x_edge(i + 1));
        if (cr > cl)
            sum += (cr - cl) *
                   (ref.cells[i] + slope(i) * (0.5 * (cl + cr) - ref.x_center(i)));
    }
    return sum / (b - a);
}

std::pair<double, double> l2_errors(const MacroState& patch, const FvState& reference,
                                    const PatchGeometry& geom) {
    const int n = geom.n_cells;
    if (static_cast<int>(patch.teeth.size()) != n + 1 ||
        static_cast<int>(patch.gaps.size()) != n)
        throw std::invalid_argument("patch state does not match geometry");

    double st = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double ref_avg =
            footprint_average(reference, geom.tooth_left(i), geom.tooth_right(i));
        const double d = patch.teeth[i] - ref_avg;
        st += d * d;
    }
    double sg = 0.0;
    for (int g = 0; g < n; ++g) {
        const double ref_avg =
            footprint_average(reference, geom.gap_left(g), geom.gap_right(g));
        const double d = patch.gaps[g] - ref_avg;
        sg += d * d;
    }
    return {std::sqrt(st / (n + 1)), std::sqrt(sg / n)};
}

std::pair<double, double> steady_state_compare(std::span<const double> a,
                                               std::span<const double> b) {
    if (a.size() != b.size() || a.empty())
        throw std::invalid_argument("profile size mismatch");
    double s2 = 0.0, linf = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = std::abs(a[i] - b[i]);
        s2 += d * d;
        linf = std::max(linf, d);
    }
    return {std::sqrt(s2 / static_cast<double>(a.size())), linf};
}

MacroState gaussian_macro_state(const PatchGeometry& geom, double a, double b,
                                double c) {
    auto f = [&](double x) {
        const double z = (x - b) / c;
        return a * std::exp(-z * z);
    };
    MacroState s;
    s.teeth.resize(geom.n_teeth());
    s.gaps.resize(geom.n_gaps());
    for (int i = 0; i < geom.n_teeth(); ++i)
        s.teeth[i] = simpson_average(f, geom.tooth_left(i), geom.tooth_right(i));
    for (int g = 0; g < geom.n_gaps(); ++g)
        s.gaps[g] = simpson_average(f, geom.gap_left(g), geom.gap_right(g));
    return s;
}

OrderStudyResult run_order_study(int limit, std::span<const int> n_list,
                                 const OrderStudyConfig& config) {
    if (limit != 1 && limit != 2) throw std::invalid_argument("limit must be 1 or 2");
    if (n_list.size() < 3)
        throw std::invalid_argument("order study needs >= 3 grid sizes");

    const double dx_ref = 2.0 / config.n_ref;
    const double dt_ref = 2.0 * dx_ref * dx_ref;
    const double t_end = config.ref_steps * dt_ref;

    FvState ref = make_fv_state(config.n_ref);
    ref.cells = gaussian_cell_averages(config.n_ref, config.ic_a, config.ic_b,
                                       config.ic_c);
    run_to_time(ref, config.params, dt_ref, t_end);

    std::vector<int> ns(n_list.begin(), n_list.end());
    std::sort(ns.begin(), ns.end());

    OrderStudyResult result;
    result.t_end = t_end;
    result.rows.resize(ns.size());
    std::string error;

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(config.workers) \
    if (config.workers > 1)
#endif
    for (int c = 0; c < static_cast<int>(ns.size()); ++c) {
        try {
            const int n = ns[c];
            const double dx = 2.0 / n;
            PatchGeometry geom;
            PatchRunConfig run;
            run.workers = 1;
            if (limit == 1) {
                // Tooth and buffer both one reference bin wide; the micro step
                // matches the reference step, so 10000 coarse steps land on t_end.
                geom = build_geometry(n, 3.0 * dx_ref / dx, 1, 1);
                run.dt_micro = dt_ref;
                run.n_b_steps = 1;
                run.m_project = 0;
            } else {
                geom = build_geometry(n, 0.1, 10, 10);
                run.n_b_steps = geom.n_b;
                run.m_project = 9;
                const double dt_target = 4.0 * geom.h_fine * geom.h_fine;
                const double outer_target =
                    (run.m_project + 1) * run.n_b_steps * dt_target;
                const auto n_outer_d = std::max(1.0, std::round(t_end / outer_target));
                run.dt_micro =
                    t_end / (n_outer_d * (run.m_project + 1) * run.n_b_steps);
            }
            const int n_outer = static_cast<int>(
                std::llround(t_end / ((run.m_project + 1) * run.delta_t())));

            FvMicroBackend backend(config.params);
            MacroState init =
                gaussian_macro_state(geom, config.ic_a, config.ic_b, config.ic_c);
            Trajectory traj =
                run_patch_dynamics(init, geom, config.params, backend, run, n_outer);
            const auto [et, eg] = l2_errors(traj.states.back(), ref, geom);
            result.rows[c] = {n, dx, et, eg};
        } catch (const std::exception& e) {
#ifdef _OPENMP
#pragma omp critical
#endif
            error = e.what();
        }
    }
    if (!error.empty()) throw std::runtime_error(error);

    std::vector<double> dxs, et, eg;
    for (const auto& row : result.rows) {
        dxs.push_back(row.dx);
        et.push_back(row.err_teeth);
        eg.push_back(row.err_gaps);
    }
    result.teeth_fit = fit_loglog(dxs, et);
    result.gaps_fit = fit_loglog(dxs, eg);
    return result;
}

}  // namespace patchdyn
