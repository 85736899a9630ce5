// Timing comparison of the serial and OpenMP paths for the two hot kernels:
// the full-domain finite-volume step and one gap-tooth coarse step.
#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "patchdyn/analysis.hpp"
#include "patchdyn/fv.hpp"
#include "patchdyn/patch.hpp"

using namespace patchdyn;
using clk = std::chrono::steady_clock;

namespace {

double seconds_since(clk::time_point t0) {
    return std::chrono::duration<double>(clk::now() - t0).count();
}

ModelParams params() { return {1.0, 0.075, -0.072, 20.0, 20.0, 40.0}; }

double bench_fv(int workers, int n_cells, int steps) {
    FvState s = make_fv_state(n_cells);
    s.cells = gaussian_cell_averages(n_cells, 1.811, 0.01545, 0.3115);
    const double dt = 2.0 * s.dx_f * s.dx_f;
    const auto t0 = clk::now();
    for (int k = 0; k < steps; ++k) fv_step(s, params(), dt, workers);
    return seconds_since(t0);
}

double bench_patch(int workers, int coarse_steps) {
    const auto g = build_geometry(41, 0.1, 10, 10);
    const MacroState init = gaussian_macro_state(g, 1.811, 0.01545, 0.3115);
    FvMicroBackend backend(params());
    PatchRunConfig cfg;
    cfg.dt_micro = 4.0 * g.h_fine * g.h_fine;
    cfg.n_b_steps = g.n_b;
    cfg.m_project = 90;
    cfg.workers = workers;
    const auto t0 = clk::now();
    run_patch_dynamics(init, g, params(), backend, cfg, coarse_steps);
    return seconds_since(t0);
}

double bench_agents(int workers, int coarse_steps) {
    const auto g = build_geometry(21, 0.2, 10, 10);
    const MacroState init = gaussian_macro_state(g, 1.811, 0.01545, 0.3115);
    AgentMicroBackend backend(params(), 2e5, 4, 10, 1, g.h_fine / 2);
    PatchRunConfig cfg;
    cfg.dt_micro = 2e-4;
    cfg.n_b_steps = 10;
    cfg.m_project = 9;
    cfg.n_realizations = 4;
    cfg.workers = workers;
    run_patch_dynamics(init, g, params(), backend, cfg, 1);  // warm up
    const auto t0 = clk::now();
    run_patch_dynamics(init, g, params(), backend, cfg, coarse_steps);
    return seconds_since(t0);
}

}  // namespace

int main() {
    int max_workers = 1;
#ifdef _OPENMP
    max_workers = omp_get_max_threads();
#endif
    std::printf("%-28s %8s %12s %8s\n", "kernel", "workers", "seconds", "speedup");

    const double fv1 = bench_fv(1, 4001, 4000);
    std::printf("%-28s %8d %12.4f %8s\n", "fv_step 4001 cells x4000", 1, fv1, "1.00");
    if (max_workers > 1) {
        const double fvn = bench_fv(max_workers, 4001, 4000);
        std::printf("%-28s %8d %12.4f %8.2f\n", "fv_step 4001 cells x4000",
                    max_workers, fvn, fv1 / fvn);
    }

    const double gt1 = bench_patch(1, 200);
    std::printf("%-28s %8d %12.4f %8s\n", "gap-tooth fv x200", 1, gt1, "1.00");
    if (max_workers > 1) {
        const double gtn = bench_patch(max_workers, 200);
        std::printf("%-28s %8d %12.4f %8.2f\n", "gap-tooth fv x200", max_workers, gtn,
                    gt1 / gtn);
    }

    const double ag1 = bench_agents(1, 10);
    std::printf("%-28s %8d %12.4f %8s\n", "gap-tooth agents x10", 1, ag1, "1.00");
    if (max_workers > 1) {
        const double agn = bench_agents(max_workers, 10);
        std::printf("%-28s %8d %12.4f %8.2f\n", "gap-tooth agents x10", max_workers,
                    agn, ag1 / agn);
    }
    return 0;
}
