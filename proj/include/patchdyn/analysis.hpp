#pragma once

#include <span>
#include <utility>
#include <vector>

#include "patchdyn/fv.hpp"
#include "patchdyn/geometry.hpp"
#include "patchdyn/model.hpp"

namespace patchdyn {

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double ci_lo = 0.0;   // 95% confidence interval for the slope
    double ci_hi = 0.0;
    double r2 = 0.0;
};

/// Ordinary least squares on (log x, log y); CI from the t distribution with
/// n-2 degrees of freedom.
FitResult fit_loglog(std::span<const double> x, std::span<const double> y);

/// Average of the reference cell-average field over [a, b] using exact
/// partial-cell overlap weights.
double footprint_average(const FvState& ref, double a, double b);

/// RMS differences between the patch state and the footprint-averaged
/// reference, separately over the N+1 teeth and the N gaps.
std::pair<double, double> l2_errors(const MacroState& patch, const FvState& reference,
                                    const PatchGeometry& geom);

/// (L2, L-inf) norms of the difference of two profiles on common footprints.
std::pair<double, double> steady_state_compare(std::span<const double> a,
                                               std::span<const double> b);

struct OrderStudyRow {
    int n = 0;
    double dx = 0.0;
    double err_teeth = 0.0;
    double err_gaps = 0.0;
};

struct OrderStudyResult {
    std::vector<OrderStudyRow> rows;   // sorted by N ascending
    FitResult teeth_fit;
    FitResult gaps_fit;
    double t_end = 0.0;
};

struct OrderStudyConfig {
    ModelParams params;
    double ic_a = 1.811;
    double ic_b = 0.01545;
    double ic_c = 0.3115;
    int n_ref = 963;          // reference fine-FV bins
    int ref_steps = 10000;    // with dt_ref = 2 * dx_ref^2
    int workers = 1;
};

/// Consistency-order study. Limit 1 pins tooth and buffer width to the
/// reference bin width while the big cells vary; limit 2 keeps the
/// unit-to-cell ratio fixed (alpha = 0.1, n_t = n_b = 10) and scales the
/// whole unit with dx.
OrderStudyResult run_order_study(int limit, std::span<const int> n_list,
                                 const OrderStudyConfig& config);

/// Initial macro state: footprint averages of the Gaussian-like profile.
MacroState gaussian_macro_state(const PatchGeometry& geom, double a, double b, double c);

}  // namespace patchdyn
