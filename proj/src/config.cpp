#include "patchdyn/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "patchdyn/csv.hpp"
#include "patchdyn/geometry.hpp"

namespace patchdyn {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

void RunConfig::validate() const {
    std::vector<std::string> errors;
    auto check = [&](bool ok, const std::string& msg) {
        if (!ok) errors.push_back(msg);
    };

    check(n_cells >= 3 && n_cells % 2 == 1, "n_cells must be odd and >= 3");
    check(n_t >= 1, "n_t must be >= 1");
    check(n_b >= 1, "n_b must be >= 1");
    check(alpha > 0.0, "alpha must be > 0");
    if (n_t >= 1)
        check(alpha < 2.0 / 3.0 * (n_t + 2.0 * n_b) / n_t,
              "alpha too large: boundary gap width would be <= 0");
    check(params.gamma >= 0.0, "gamma must be >= 0");
    check(params.eps_plus > 0.0, "eps_plus must be > 0");
    check(params.eps_minus < 0.0, "eps_minus must be < 0");
    check(params.nu_ex_plus >= 0.0 && params.nu_ex_minus >= 0.0,
          "nu_ex rates must be >= 0");
    check(params.g >= 0.0, "g must be >= 0");
    check(dt_factor > 0.0, "dt_factor must be > 0");
    check(m_project >= 0, "m_project must be >= 0");
    check(n_realizations >= 1, "n_realizations must be >= 1");
    check(n_agents > 0.0, "n_agents must be > 0");
    check(n_fine >= 3 && n_fine % 2 == 1, "n_fine must be odd and >= 3");
    check(n_outer >= 0, "n_outer must be >= 0");
    check(workers >= 1, "workers must be >= 1");
    check(ic_c != 0.0, "ic_c must be nonzero");
    if (backend == BackendKind::agent) {
        check(delta_t > 0.0, "agent backend requires delta_t > 0");
        check(n_micro_steps >= 1, "agent backend requires n_micro_steps >= 1");
    }

    if (!errors.empty()) {
        std::string msg = "invalid configuration:";
        for (const auto& e : errors) msg += "\n  - " + e;
        throw std::invalid_argument(msg);
    }
}

double RunConfig::micro_dt(double h_fine) const {
    if (backend == BackendKind::agent) return delta_t / n_micro_steps;
    return dt_factor * h_fine * h_fine;
}

PatchRunConfig RunConfig::patch_config(double h_fine) const {
    PatchRunConfig pc;
    pc.dt_micro = micro_dt(h_fine);
    pc.n_b_steps = backend == BackendKind::agent ? n_micro_steps : n_b;
    pc.m_project = m_project;
    pc.n_realizations = n_realizations;
    pc.seed = seed;
    pc.feedback = feedback;
    pc.workers = workers;
    return pc;
}

std::map<std::string, std::string> RunConfig::as_map() const {
    std::map<std::string, std::string> m;
    m["gamma"] = fmt_double(params.gamma);
    m["eps_plus"] = fmt_double(params.eps_plus);
    m["eps_minus"] = fmt_double(params.eps_minus);
    m["nu_ex_plus"] = fmt_double(params.nu_ex_plus);
    m["nu_ex_minus"] = fmt_double(params.nu_ex_minus);
    m["g"] = fmt_double(params.g);
    m["n_cells"] = std::to_string(n_cells);
    m["alpha"] = fmt_double(alpha);
    m["n_t"] = std::to_string(n_t);
    m["n_b"] = std::to_string(n_b);
    m["backend"] = backend == BackendKind::fv ? "fv" : "agent";
    m["dt_factor"] = fmt_double(dt_factor);
    m["delta_t"] = fmt_double(delta_t);
    m["n_micro_steps"] = std::to_string(n_micro_steps);
    m["m_project"] = std::to_string(m_project);
    m["n_realizations"] = std::to_string(n_realizations);
    m["n_agents"] = fmt_double(n_agents);
    m["reinjection_offset"] = fmt_double(reinjection_offset);
    m["feedback"] = feedback == FeedbackMode::frozen ? "frozen" : "per-micro-step";
    m["n_outer"] = std::to_string(n_outer);
    m["n_fine"] = std::to_string(n_fine);
    m["ic_a"] = fmt_double(ic_a);
    m["ic_b"] = fmt_double(ic_b);
    m["ic_c"] = fmt_double(ic_c);
    m["seed"] = std::to_string(seed);
    m["workers"] = std::to_string(workers);
    m["out_dir"] = out_dir;
    return m;
}

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> errors;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        try {
            if (key == "gamma") cfg.params.gamma = std::stod(val);
            else if (key == "eps_plus") cfg.params.eps_plus = std::stod(val);
            else if (key == "eps_minus") cfg.params.eps_minus = std::stod(val);
            else if (key == "nu_ex_plus") cfg.params.nu_ex_plus = std::stod(val);
            else if (key == "nu_ex_minus") cfg.params.nu_ex_minus = std::stod(val);
            else if (key == "g") cfg.params.g = std::stod(val);
            else if (key == "n_cells") cfg.n_cells = std::stoi(val);
            else if (key == "alpha") cfg.alpha = std::stod(val);
            else if (key == "n_t") cfg.n_t = std::stoi(val);
            else if (key == "n_b") cfg.n_b = std::stoi(val);
            else if (key == "backend") {
                if (val == "fv") cfg.backend = BackendKind::fv;
                else if (val == "agent") cfg.backend = BackendKind::agent;
                else errors.push_back("backend must be fv or agent");
            }
            else if (key == "dt_factor") cfg.dt_factor = std::stod(val);
            else if (key == "delta_t") cfg.delta_t = std::stod(val);
            else if (key == "n_micro_steps") cfg.n_micro_steps = std::stoi(val);
            else if (key == "m_project") cfg.m_project = std::stoi(val);
            else if (key == "n_realizations") cfg.n_realizations = std::stoi(val);
            else if (key == "n_agents") cfg.n_agents = std::stod(val);
            else if (key == "reinjection_offset") cfg.reinjection_offset = std::stod(val);
            else if (key == "feedback") {
                if (val == "frozen") cfg.feedback = FeedbackMode::frozen;
                else if (val == "per-micro-step") cfg.feedback = FeedbackMode::per_micro_step;
                else errors.push_back("feedback must be frozen or per-micro-step");
            }
            else if (key == "n_outer") cfg.n_outer = std::stoi(val);
            else if (key == "n_fine") cfg.n_fine = std::stoi(val);
            else if (key == "ic_a") cfg.ic_a = std::stod(val);
            else if (key == "ic_b") cfg.ic_b = std::stod(val);
            else if (key == "ic_c") cfg.ic_c = std::stod(val);
            else if (key == "seed") cfg.seed = std::stoull(val);
            else if (key == "workers") cfg.workers = std::stoi(val);
            else if (key == "out_dir") cfg.out_dir = val;
            else errors.push_back("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        } catch (const std::exception&) {
            errors.push_back("line " + std::to_string(lineno) + ": cannot parse value '" +
                             val + "' for key '" + key + "'");
        }
    }
    if (!errors.empty()) {
        std::string msg = "invalid configuration:";
        for (const auto& e : errors) msg += "\n  - " + e;
        throw std::invalid_argument(msg);
    }
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

}  // namespace patchdyn
