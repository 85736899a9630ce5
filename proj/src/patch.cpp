#include "patchdyn/patch.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "patchdyn/fv.hpp"
#include "patchdyn/rng.hpp"

namespace patchdyn {

namespace {

enum class UnitKind { left_boundary, interior, right_boundary };

UnitKind kind_of(int unit_index, const PatchGeometry& geom) {
    if (unit_index == 0) return UnitKind::left_boundary;
    if (unit_index == geom.n_cells) return UnitKind::right_boundary;
    return UnitKind::interior;
}

double tooth_center_x(int unit_index, const PatchGeometry& geom) {
    switch (kind_of(unit_index, geom)) {
        case UnitKind::left_boundary: return -1.0 + 0.5 * geom.tooth_width;
        case UnitKind::right_boundary: return 1.0 - 0.5 * geom.tooth_width;
        default: return geom.tooth_centers[unit_index];
    }
}

class FvUnitRun final : public UnitRun {
  public:
    FvUnitRun(const QuadraticReconstruction& rec, const PatchGeometry& geom,
              int unit_index, const ModelParams& params)
        : params_(params), kind_(kind_of(unit_index, geom)), h_(geom.h_fine) {
        const int n_bins = kind_ == UnitKind::interior ? geom.n_t + 2 * geom.n_b
                                                       : geom.n_t + geom.n_b;
        bins_ = fine_bin_averages(rec, rec.x_left, n_bins, h_);
        x_base_ = tooth_center_x(unit_index, geom) + rec.x_left;
        lo_ = 0;
        hi_ = n_bins;
        switch (kind_) {
            case UnitKind::interior:
                edge_left_ = geom.n_b;
                edge_right_ = geom.n_b + geom.n_t;
                break;
            case UnitKind::left_boundary:
                edge_left_ = 0;
                edge_right_ = geom.n_t;
                break;
            case UnitKind::right_boundary:
                edge_left_ = geom.n_b;
                edge_right_ = geom.n_b + geom.n_t;
                break;
        }
    }

    StepFluxes micro_step(const NuPair& nu, double dt) override {
        const double s2 = sigma2(params_, nu);
        if (dt > h_ * h_ / std::max(s2, 1e-300) * (1.0 + 1e-12))
            throw std::invalid_argument("micro dt above fine-bin stability bound");

        const int n = static_cast<int>(bins_.size());
        // Interfaces computable from the current valid window [lo_, hi_).
        const int m_lo = kind_ == UnitKind::left_boundary ? 0 : lo_ + 1;
        const int m_hi = kind_ == UnitKind::right_boundary ? n : hi_ - 1;
        flux_.resize(n + 1);
        for (int m = m_lo; m <= m_hi; ++m) {
            // Zero-density wall at +-1: ghost bin with sign-flipped density.
            const double ul = m == 0 ? -bins_[0] : bins_[m - 1];
            const double ur = m == n ? -bins_[n - 1] : bins_[m];
            const double mu = drift_mu(params_, nu, x_base_ + m * h_);
            flux_[m] = edge_flux(ul, ur, mu, s2, h_);
        }

        StepFluxes out{flux_[edge_left_], flux_[edge_right_]};

        const double lam = dt / h_;
        double check = 0.0;
        for (int j = m_lo; j < m_hi; ++j) {
            bins_[j] += lam * (flux_[j] - flux_[j + 1]);
            check += bins_[j];
        }
        if (!std::isfinite(check))
            throw std::runtime_error("fine-bin densities became non-finite");

        if (kind_ != UnitKind::left_boundary) ++lo_;
        if (kind_ != UnitKind::right_boundary) --hi_;
        return out;
    }

  private:
    ModelParams params_;
    UnitKind kind_;
    double h_;
    double x_base_ = 0.0;   // global coordinate of interface 0
    std::vector<double> bins_;
    std::vector<double> flux_;
    int lo_ = 0, hi_ = 0;
    int edge_left_ = 0, edge_right_ = 0;
};

class AgentUnitRun final : public UnitRun {
  public:
    AgentUnitRun(const QuadraticReconstruction& rec, const PatchGeometry& geom,
                 int unit_index, int coarse_index, const ModelParams& params,
                 double n_agents, int n_real, std::uint64_t seed, double offset)
        : params_(params),
          kind_(kind_of(unit_index, geom)),
          n_agents_(n_agents),
          n_real_(n_real),
          offset_(offset) {
        const int n_bins = kind_ == UnitKind::interior ? geom.n_t + 2 * geom.n_b
                                                       : geom.n_t + geom.n_b;
        const double h = geom.h_fine;
        const double x_base = tooth_center_x(unit_index, geom) + rec.x_left;
        const auto bins = fine_bin_averages(rec, rec.x_left, n_bins, h);
        const auto app = apportion_agents(bins, h, n_agents);
        clipped_ = app.clipped_mass;

        const double xc = tooth_center_x(unit_index, geom);
        edge_left_ = kind_ == UnitKind::left_boundary ? -1.0
                                                      : xc - 0.5 * geom.tooth_width;
        edge_right_ = kind_ == UnitKind::right_boundary ? 1.0
                                                        : xc + 0.5 * geom.tooth_width;

        replicas_.resize(n_real);
        rngs_.reserve(n_real);
        for (int r = 0; r < n_real; ++r) {
            rngs_.push_back(make_stream(seed, static_cast<std::uint64_t>(unit_index),
                                        static_cast<std::uint64_t>(r),
                                        static_cast<std::uint64_t>(coarse_index)));
            auto& pts = replicas_[r];
            for (int j = 0; j < n_bins; ++j)
                for (std::int64_t c = 0; c < app.counts[j]; ++c)
                    pts.push_back(x_base + (j + uniform01(rngs_[r])) * h);
        }
    }

    StepFluxes micro_step(const NuPair& nu, double dt) override {
        const double nu_tot = nu.total();
        const double p_good = nu_tot > 0.0 ? nu.nu_plus / nu_tot : 0.0;
        const double decay = std::exp(-params_.gamma * dt);
        const double mean_arrivals = nu_tot * dt;

        std::int64_t net_l = 0, net_r = 0;
        for (int r = 0; r < n_real_; ++r) {
            auto& pts = replicas_[r];
            auto& rng = rngs_[r];
            std::size_t keep = 0;
            for (std::size_t a = 0; a < pts.size(); ++a) {
                double x = pts[a];
                double x_new = x * decay;
                net_l += (x_new > edge_left_) - (x > edge_left_);
                net_r += (x_new > edge_right_) - (x > edge_right_);
                x = x_new;

                bool absorbed = false;
                const long k = nu_tot > 0.0 ? poisson_draw(mean_arrivals, rng) : 0;
                for (long j = 0; j < k; ++j) {
                    x_new = x + ((uniform01(rng) < p_good) ? params_.eps_plus
                                                           : params_.eps_minus);
                    net_l += (x_new > edge_left_) - (x > edge_left_);
                    net_r += (x_new > edge_right_) - (x > edge_right_);
                    x = x_new;
                    if (x > 1.0) {
                        ++buys_;
                        absorbed = true;
                        break;
                    }
                    if (x < -1.0) {
                        ++sells_;
                        absorbed = true;
                        break;
                    }
                }
                if (!absorbed) pts[keep++] = x;
            }
            pts.resize(keep);
        }

        const double norm = n_agents_ * dt * n_real_;
        return {static_cast<double>(net_l) / norm, static_cast<double>(net_r) / norm};
    }

    double clipped_mass() const override { return clipped_; }

  private:
    ModelParams params_;
    UnitKind kind_;
    double n_agents_;
    int n_real_;
    double offset_;
    double edge_left_ = 0.0, edge_right_ = 0.0;
    double clipped_ = 0.0;
    std::int64_t buys_ = 0, sells_ = 0;
    std::vector<std::vector<double>> replicas_;
    std::vector<std::mt19937_64> rngs_;
};

}  // namespace

std::unique_ptr<UnitRun> FvMicroBackend::init_unit(const QuadraticReconstruction& rec,
                                                   const PatchGeometry& geom,
                                                   int unit_index, int) {
    return std::make_unique<FvUnitRun>(rec, geom, unit_index, params_);
}

std::unique_ptr<UnitRun> AgentMicroBackend::init_unit(
    const QuadraticReconstruction& rec, const PatchGeometry& geom, int unit_index,
    int coarse_index) {
    return std::make_unique<AgentUnitRun>(rec, geom, unit_index, coarse_index, params_,
                                          n_agents_, n_real_, seed_, offset_);
}

QuadraticReconstruction lift_unit(const MacroState& state, const PatchGeometry& geom,
                                  int unit_index) {
    const int n = geom.n_cells;
    if (unit_index == 0) return lift_left_boundary(state.teeth[0], state.gaps[0], geom);
    if (unit_index == n)
        return lift_right_boundary(state.teeth[n], state.gaps[n - 1], geom);
    return lift_interior(state.gaps[unit_index - 1], state.teeth[unit_index],
                         state.gaps[unit_index], geom);
}

MacroState apply_flux_update(const MacroState& state, const PatchGeometry& geom,
                             const ToothFluxes& fluxes, double delta_t) {
    const int n = geom.n_cells;
    MacroState out = state;
    for (int i = 0; i <= n; ++i)
        out.teeth[i] += delta_t / geom.tooth_width * (fluxes.left[i] - fluxes.right[i]);
    for (int g = 0; g < n; ++g)
        out.gaps[g] += delta_t / geom.gap_width(g) * (fluxes.right[g] - fluxes.left[g + 1]);

    // Reinjection: the boundary outflow reappears in the gap containing x = 0.
    const double r_minus = -fluxes.left[0];
    const double r_plus = fluxes.right[n];
    out.gaps[geom.central_gap()] +=
        delta_t / geom.gap_width(geom.central_gap()) * (r_plus + r_minus);
    out.time += delta_t;
    return out;
}

std::pair<MacroState, StepDiagnostics> gap_tooth_step(
    const MacroState& state, const PatchGeometry& geom, const ModelParams& params,
    MicroBackend& backend, const PatchRunConfig& config, const Rates& rates_in,
    int coarse_index) {
    const int n_units = geom.n_teeth();
    if (static_cast<int>(state.teeth.size()) != n_units ||
        static_cast<int>(state.gaps.size()) != geom.n_gaps())
        throw std::invalid_argument("state dimensions do not match geometry");
    if (config.n_b_steps < 1 || config.n_b_steps > backend.max_steps(geom))
        throw std::invalid_argument("n_b_steps exceeds the backend's trustworthy range");
    if (!(config.dt_micro > 0.0)) throw std::invalid_argument("dt_micro must be > 0");

    std::vector<std::unique_ptr<UnitRun>> units(n_units);
    std::vector<StepFluxes> mean(n_units);
    std::string error;

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(config.workers) \
    if (config.workers > 1)
#endif
    for (int i = 0; i < n_units; ++i) {
        try {
            units[i] = backend.init_unit(lift_unit(state, geom, i), geom, i, coarse_index);
        } catch (const std::exception& e) {
#ifdef _OPENMP
#pragma omp critical
#endif
            error = e.what();
        }
    }
    if (!error.empty()) throw std::runtime_error(error);

    if (config.feedback == FeedbackMode::frozen) {
        // Units are independent for the whole coarse step.
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(config.workers) \
    if (config.workers > 1)
#endif
        for (int i = 0; i < n_units; ++i) {
            try {
                const NuPair nu = nu_rates(params, rates_in);
                for (int k = 0; k < config.n_b_steps; ++k) {
                    const StepFluxes f = units[i]->micro_step(nu, config.dt_micro);
                    mean[i].left += f.left;
                    mean[i].right += f.right;
                }
            } catch (const std::exception& e) {
#ifdef _OPENMP
#pragma omp critical
#endif
                error = e.what();
            }
        }
        if (!error.empty()) throw std::runtime_error(error);
    } else {
        // Rates are rebroadcast after every micro step; one barrier per step.
        Rates rates = rates_in;
        std::vector<StepFluxes> step(n_units);
        for (int k = 0; k < config.n_b_steps; ++k) {
            const NuPair nu = nu_rates(params, rates);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(config.workers) \
    if (config.workers > 1)
#endif
            for (int i = 0; i < n_units; ++i) {
                try {
                    step[i] = units[i]->micro_step(nu, config.dt_micro);
                } catch (const std::exception& e) {
#ifdef _OPENMP
#pragma omp critical
#endif
                    error = e.what();
                }
            }
            if (!error.empty()) throw std::runtime_error(error);
            for (int i = 0; i < n_units; ++i) {
                mean[i].left += step[i].left;
                mean[i].right += step[i].right;
            }
            rates = {std::max(0.0, step[n_units - 1].right),
                     std::max(0.0, -step[0].left)};
        }
    }

    ToothFluxes fluxes;
    fluxes.left.resize(n_units);
    fluxes.right.resize(n_units);
    for (int i = 0; i < n_units; ++i) {
        fluxes.left[i] = mean[i].left / config.n_b_steps;
        fluxes.right[i] = mean[i].right / config.n_b_steps;
        if (!std::isfinite(fluxes.left[i]) || !std::isfinite(fluxes.right[i]))
            throw std::runtime_error("non-finite tooth-edge flux in unit " +
                                     std::to_string(i));
    }

    MacroState next = apply_flux_update(state, geom, fluxes, config.delta_t());

    StepDiagnostics diag;
    diag.mass = total_mass(next, geom);
    diag.rates = {std::max(0.0, fluxes.right[n_units - 1]),
                  std::max(0.0, -fluxes.left[0])};
    for (const auto& u : units) diag.clipped_mass += u->clipped_mass();

    if (backend.is_continuum()) {
        const double m0 = total_mass(state, geom);
        if (std::abs(diag.mass - m0) > 1e-10 * std::max(std::abs(m0), 1e-12))
            throw std::runtime_error("mass drift beyond tolerance in gap_tooth_step: " +
                                     std::to_string(m0) + " -> " +
                                     std::to_string(diag.mass));
    }
    return {std::move(next), diag};
}

MacroState projective_step(const MacroState& state_n, const MacroState& state_n_delta,
                           const PatchRunConfig& config) {
    const double delta_t = state_n_delta.time - state_n.time;
    MacroState out = state_n;
    const double factor = config.m_project + 1;
    for (std::size_t i = 0; i < out.teeth.size(); ++i)
        out.teeth[i] += factor * (state_n_delta.teeth[i] - state_n.teeth[i]);
    for (std::size_t g = 0; g < out.gaps.size(); ++g)
        out.gaps[g] += factor * (state_n_delta.gaps[g] - state_n.gaps[g]);
    out.time = state_n.time + factor * delta_t;
    return out;
}

Trajectory run_patch_dynamics(const MacroState& initial, const PatchGeometry& geom,
                              const ModelParams& params, MicroBackend& backend,
                              const PatchRunConfig& config, int n_outer) {
    Trajectory traj;
    traj.space_fraction = geom.alpha;
    traj.time_fraction = 1.0 / (config.m_project + 1);
    traj.states.reserve(n_outer + 1);
    traj.states.push_back(initial);
    traj.diags.reserve(n_outer);

    Rates rates;
    for (int step = 0; step < n_outer; ++step) {
        const MacroState& current = traj.states.back();
        auto [after_delta, diag] =
            gap_tooth_step(current, geom, params, backend, config, rates, step);
        rates = diag.rates;
        traj.states.push_back(projective_step(current, after_delta, config));
        traj.diags.push_back(diag);
    }
    return traj;
}

}  // namespace patchdyn
