#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "patchdyn/model.hpp"
#include "patchdyn/patch.hpp"

namespace patchdyn {

enum class BackendKind { fv, agent };

/// Everything an experiment run needs, parsed from a flat `key = value` file
/// with `#` comments. Validation collects all problems into one report.
struct RunConfig {
    ModelParams params;

    // Geometry
    int n_cells = 41;
    double alpha = 0.1;
    int n_t = 10;
    int n_b = 10;

    // Patch run
    BackendKind backend = BackendKind::fv;
    double dt_factor = 4.0;       // micro dt = dt_factor * h_fine^2 (fv backend)
    double delta_t = 0.0;         // coarse step (agent backend); 0 = n_b steps of dt
    int n_micro_steps = 0;        // agent backend micro steps per coarse step
    int m_project = 90;
    int n_realizations = 1;
    double n_agents = 3e6;
    double reinjection_offset = -1.0;  // < 0 means default h_fine/2
    FeedbackMode feedback = FeedbackMode::frozen;
    int n_outer = 0;

    // Full-domain runs
    int n_fine = 1271;

    // Initial condition a*exp(-((x-b)/c)^2)
    double ic_a = 1.811;
    double ic_b = 0.01545;
    double ic_c = 0.3115;

    std::uint64_t seed = 1;
    int workers = 1;
    std::string out_dir = "out";

    /// Throws std::invalid_argument with one aggregated message listing every
    /// violated precondition.
    void validate() const;

    double micro_dt(double h_fine) const;
    PatchRunConfig patch_config(double h_fine) const;

    /// All key/value pairs for the manifest, in deterministic order.
    std::map<std::string, std::string> as_map() const;
};

RunConfig parse_config_file(const std::string& path);
RunConfig parse_config_text(const std::string& text);

}  // namespace patchdyn
