#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "patchdyn/agents.hpp"
#include "patchdyn/analysis.hpp"
#include "patchdyn/config.hpp"
#include "patchdyn/csv.hpp"
#include "patchdyn/fv.hpp"
#include "patchdyn/patch.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace patchdyn;

namespace {

struct CommonOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::string out_dir;
    double t_end = 0.0;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_t_end = true) {
    cmd->add_option("--config", opts.config_path, "configuration file (key = value)");
    cmd->add_option("--seed", opts.seed, "override the RNG seed");
    cmd->add_option("--workers", opts.workers, "override the worker thread count");
    cmd->add_option("--out", opts.out_dir, "output directory");
    if (with_t_end) cmd->add_option("--t-end", opts.t_end, "simulated end time");
}

RunConfig load_config(const CommonOpts& opts) {
    RunConfig cfg =
        opts.config_path.empty() ? RunConfig{} : parse_config_file(opts.config_path);
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.workers) cfg.workers = *opts.workers;
    if (!opts.out_dir.empty()) {
        cfg.out_dir = opts.out_dir;
    } else if (const char* env = std::getenv("PATCHDYN_OUT"); env && *env) {
        cfg.out_dir = env;
    }
    cfg.validate();
    fs::create_directories(cfg.out_dir);
    return cfg;
}

void write_manifest(const RunConfig& cfg, const std::string& command,
                    const std::vector<std::string>& outputs,
                    const json& extra = json::object()) {
    json m;
    m["command"] = command;
    m["config"] = cfg.as_map();
    m["outputs"] = outputs;
    for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
    std::ofstream out(fs::path(cfg.out_dir) / "manifest.json");
    out << m.dump(2) << '\n';
}

double gauss(const RunConfig& cfg, double x) {
    const double z = (x - cfg.ic_b) / cfg.ic_c;
    return cfg.ic_a * std::exp(-z * z);
}

int cmd_run_fv(const CommonOpts& opts) {
    RunConfig cfg = load_config(opts);
    const double t_end = opts.t_end > 0.0 ? opts.t_end : 1.0;

    FvState s = make_fv_state(cfg.n_fine);
    s.cells = gaussian_cell_averages(cfg.n_fine, cfg.ic_a, cfg.ic_b, cfg.ic_c);
    const double dt_raw = cfg.dt_factor * s.dx_f * s.dx_f;
    const long n_steps = std::max(1L, std::lround(t_end / dt_raw));
    const double dt = t_end / static_cast<double>(n_steps);

    const fs::path dir(cfg.out_dir);
    CsvWriter rates(dir / "rates.csv", "t,r_plus,r_minus");
    rates.row(s.time, s.rates.r_plus, s.rates.r_minus);
    const long sample = std::max(1L, n_steps / 500);
    for (long k = 0; k < n_steps; ++k) {
        fv_step(s, cfg.params, dt, cfg.workers);
        if ((k + 1) % sample == 0 || k + 1 == n_steps)
            rates.row(s.time, s.rates.r_plus, s.rates.r_minus);
    }

    CsvWriter profile(dir / "profile.csv", "x_center,width,density");
    for (int i = 0; i < s.n(); ++i) profile.row(s.x_center(i), s.dx_f, s.cells[i]);

    write_manifest(cfg, "run-fv", {"profile.csv", "rates.csv"},
                   {{"t_end", t_end}, {"dt", dt}, {"n_steps", n_steps},
                    {"mass", fv_mass(s)}});
    return 0;
}

int cmd_run_agents(const CommonOpts& opts) {
    RunConfig cfg = load_config(opts);
    const double t_end = opts.t_end > 0.0 ? opts.t_end : 1.0;
    const double dt = cfg.backend == BackendKind::agent && cfg.delta_t > 0.0
                          ? cfg.delta_t / cfg.n_micro_steps
                          : 1e-3;
    const long n_steps = std::max(1L, std::lround(t_end / dt));

    AgentPopulation pop;
    pop.params = cfg.params;
    pop.rng = make_stream(cfg.seed);
    pop.n_total = cfg.n_agents;
    // Sample initial states from the configured profile.
    std::vector<double> bins(cfg.n_fine);
    const double dx = 2.0 / cfg.n_fine;
    for (int i = 0; i < cfg.n_fine; ++i)
        bins[i] = simpson_average([&](double x) { return gauss(cfg, x); },
                                  -1.0 + i * dx, -1.0 + (i + 1) * dx);
    const auto app = apportion_agents(bins, dx, cfg.n_agents);
    for (int i = 0; i < cfg.n_fine; ++i)
        for (std::int64_t c = 0; c < app.counts[i]; ++c)
            pop.states.push_back(-1.0 + (i + uniform01(pop.rng)) * dx);

    const fs::path dir(cfg.out_dir);
    CsvWriter rates(dir / "rates.csv", "t,r_plus,r_minus");
    const long window = std::max(1L, n_steps / 200);
    RateReport fed;
    double t = 0.0;
    for (long k = 0; k < n_steps; ++k) {
        agent_step(pop, fed, dt);
        t += dt;
        if ((k + 1) % window == 0 || k + 1 == n_steps) {
            const long done = (k + 1) % window == 0 ? window : n_steps % window;
            fed = report_rates(pop, done * dt);
            rates.row(t, fed.r_plus, fed.r_minus);
        }
    }

    std::vector<double> edges(cfg.n_fine + 1);
    for (int i = 0; i <= cfg.n_fine; ++i) edges[i] = -1.0 + i * dx;
    const auto hist = density_histogram(pop, edges);
    CsvWriter profile(dir / "profile.csv", "x_center,width,density");
    for (int i = 0; i < cfg.n_fine; ++i)
        profile.row(-1.0 + (i + 0.5) * dx, dx, hist[i]);

    write_manifest(cfg, "run-agents", {"profile.csv", "rates.csv"},
                   {{"t_end", t_end}, {"dt", dt}, {"n_steps", n_steps},
                    {"agents_in_play", pop.states.size()}});
    return 0;
}

void write_trajectory(const fs::path& dir, const Trajectory& traj,
                      const PatchGeometry& geom) {
    CsvWriter out(dir / "trajectory.csv", "t,kind,index,x_center,width,density");
    const std::size_t n_states = traj.states.size();
    const std::size_t stride = std::max<std::size_t>(1, (n_states - 1) / 20);
    for (std::size_t k = 0; k < n_states; ++k) {
        if (k != 0 && k != n_states - 1 && k % stride != 0) continue;
        const MacroState& s = traj.states[k];
        for (int i = 0; i < geom.n_teeth(); ++i)
            out.row(s.time, "tooth", i, 0.5 * (geom.tooth_left(i) + geom.tooth_right(i)),
                    geom.tooth_width, s.teeth[i]);
        for (int g = 0; g < geom.n_gaps(); ++g)
            out.row(s.time, "gap", g, 0.5 * (geom.gap_left(g) + geom.gap_right(g)),
                    geom.gap_width(g), s.gaps[g]);
    }
    CsvWriter diag(dir / "diagnostics.csv", "t,mass,r_plus,r_minus,clipped_mass");
    for (std::size_t k = 0; k < traj.diags.size(); ++k)
        diag.row(traj.states[k + 1].time, traj.diags[k].mass, traj.diags[k].rates.r_plus,
                 traj.diags[k].rates.r_minus, traj.diags[k].clipped_mass);
}

int cmd_run_patch(const CommonOpts& opts) {
    RunConfig cfg = load_config(opts);
    const auto geom = build_geometry(cfg.n_cells, cfg.alpha, cfg.n_t, cfg.n_b);
    PatchRunConfig pc = cfg.patch_config(geom.h_fine);

    int n_outer = cfg.n_outer;
    if (opts.t_end > 0.0)
        n_outer = std::max(1, static_cast<int>(std::lround(opts.t_end / pc.outer_dt())));
    if (n_outer < 1)
        throw std::invalid_argument("set n_outer in the config or pass --t-end");

    const MacroState init = gaussian_macro_state(geom, cfg.ic_a, cfg.ic_b, cfg.ic_c);
    Trajectory traj;
    if (cfg.backend == BackendKind::fv) {
        FvMicroBackend backend(cfg.params);
        traj = run_patch_dynamics(init, geom, cfg.params, backend, pc, n_outer);
    } else {
        const double offset =
            cfg.reinjection_offset < 0.0 ? geom.h_fine / 2 : cfg.reinjection_offset;
        AgentMicroBackend backend(cfg.params, cfg.n_agents, cfg.n_realizations,
                                  cfg.n_micro_steps, cfg.seed, offset);
        traj = run_patch_dynamics(init, geom, cfg.params, backend, pc, n_outer);
    }

    const fs::path dir(cfg.out_dir);
    write_trajectory(dir, traj, geom);
    write_manifest(cfg, "run-patch", {"trajectory.csv", "diagnostics.csv"},
                   {{"n_outer", n_outer},
                    {"outer_dt", pc.outer_dt()},
                    {"t_end", traj.states.back().time},
                    {"space_fraction", traj.space_fraction},
                    {"time_fraction", traj.time_fraction},
                    {"final_mass", traj.diags.empty() ? total_mass(init, geom)
                                                      : traj.diags.back().mass}});
    return 0;
}

int cmd_order_study(const CommonOpts& opts, int limit, std::vector<int> n_list) {
    RunConfig cfg = load_config(opts);
    if (n_list.empty()) n_list = {11, 15, 21, 31, 41};

    OrderStudyConfig oc;
    oc.params = cfg.params;
    oc.ic_a = cfg.ic_a;
    oc.ic_b = cfg.ic_b;
    oc.ic_c = cfg.ic_c;
    oc.workers = cfg.workers;
    const auto res = run_order_study(limit, n_list, oc);

    const fs::path dir(cfg.out_dir);
    CsvWriter rows(dir / "order.csv", "N,dx,err_teeth,err_gaps");
    for (const auto& r : res.rows) rows.row(r.n, r.dx, r.err_teeth, r.err_gaps);
    CsvWriter fit(dir / "order_fit.csv", "target,slope,ci_lo,ci_hi,r2");
    fit.row("teeth", res.teeth_fit.slope, res.teeth_fit.ci_lo, res.teeth_fit.ci_hi,
            res.teeth_fit.r2);
    fit.row("gaps", res.gaps_fit.slope, res.gaps_fit.ci_lo, res.gaps_fit.ci_hi,
            res.gaps_fit.r2);

    std::cout << "teeth slope " << res.teeth_fit.slope << " [" << res.teeth_fit.ci_lo
              << ", " << res.teeth_fit.ci_hi << "], r2 " << res.teeth_fit.r2 << '\n'
              << "gaps  slope " << res.gaps_fit.slope << " [" << res.gaps_fit.ci_lo
              << ", " << res.gaps_fit.ci_hi << "], r2 " << res.gaps_fit.r2 << '\n';
    write_manifest(cfg, "order-study", {"order.csv", "order_fit.csv"},
                   {{"limit", limit}, {"t_end", res.t_end}});
    return 0;
}

int cmd_steady_compare(const CommonOpts& opts) {
    RunConfig cfg = load_config(opts);
    const double t_end = opts.t_end > 0.0 ? opts.t_end : 50.0;

    // Reference: full-domain solve until the profile stops moving.
    FvState fine = make_fv_state(cfg.n_fine);
    fine.cells = gaussian_cell_averages(cfg.n_fine, cfg.ic_a, cfg.ic_b, cfg.ic_c);
    const double dt_f = cfg.dt_factor * fine.dx_f * fine.dx_f;
    run_to_steady(fine, cfg.params, dt_f, 1e-7, 1.0, t_end, cfg.workers);

    // Patch run over the same horizon.
    const auto geom = build_geometry(cfg.n_cells, cfg.alpha, cfg.n_t, cfg.n_b);
    PatchRunConfig pc = cfg.patch_config(geom.h_fine);
    const int n_outer =
        std::max(1, static_cast<int>(std::lround(t_end / pc.outer_dt())));
    const MacroState init = gaussian_macro_state(geom, cfg.ic_a, cfg.ic_b, cfg.ic_c);
    FvMicroBackend backend(cfg.params);
    const Trajectory traj =
        run_patch_dynamics(init, geom, cfg.params, backend, pc, n_outer);

    const auto [et, eg] = l2_errors(traj.states.back(), fine, geom);
    const fs::path dir(cfg.out_dir);
    CsvWriter out(dir / "steady_compare.csv", "target,l2");
    out.row("teeth", et);
    out.row("gaps", eg);
    std::cout << "steady-state L2: teeth " << et << ", gaps " << eg << '\n';
    write_manifest(cfg, "steady-compare", {"steady_compare.csv"},
                   {{"t_end", t_end}, {"err_teeth", et}, {"err_gaps", eg}});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"patch dynamics toolkit for a market model and its continuum limit"};
    app.require_subcommand(1);

    CommonOpts fv_opts, ag_opts, patch_opts, order_opts, steady_opts;
    int limit = 2;
    std::vector<int> n_list;

    add_common(app.add_subcommand("run-fv", "full-domain finite-volume run"), fv_opts);
    add_common(app.add_subcommand("run-agents", "full-domain agent run"), ag_opts);
    add_common(app.add_subcommand("run-patch", "gap-tooth / projective run"),
               patch_opts);
    auto* order = app.add_subcommand("order-study", "consistency order study");
    add_common(order, order_opts, false);
    order->add_option("--limit", limit, "refinement limit (1 or 2)")
        ->check(CLI::Range(1, 2));
    order->add_option("--cells", n_list, "cell counts to test (odd)");
    add_common(app.add_subcommand("steady-compare",
                                  "compare patch and full-domain steady states"),
               steady_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("run-fv")) return cmd_run_fv(fv_opts);
        if (app.got_subcommand("run-agents")) return cmd_run_agents(ag_opts);
        if (app.got_subcommand("run-patch")) return cmd_run_patch(patch_opts);
        if (app.got_subcommand("order-study"))
            return cmd_order_study(order_opts, limit, n_list);
        if (app.got_subcommand("steady-compare")) return cmd_steady_compare(steady_opts);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
