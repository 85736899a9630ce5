#pragma once

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "patchdyn/geometry.hpp"
#include "patchdyn/lifting.hpp"
#include "patchdyn/model.hpp"

namespace patchdyn {

/// Instantaneous tooth-edge fluxes reported by one micro step of a unit
/// (positive rightward, in normalized density units).
struct StepFluxes {
    double left = 0.0;
    double right = 0.0;
};

/// One running simulation unit: a tooth plus buffers, evolved micro step by
/// micro step. After max_steps the reported tooth-edge fluxes are no longer
/// trustworthy (the buffers have been consumed / contaminated).
class UnitRun {
  public:
    virtual ~UnitRun() = default;
    virtual StepFluxes micro_step(const NuPair& nu, double dt) = 0;
    virtual double clipped_mass() const { return 0.0; }
};

class MicroBackend {
  public:
    virtual ~MicroBackend() = default;
    virtual std::unique_ptr<UnitRun> init_unit(const QuadraticReconstruction& rec,
                                               const PatchGeometry& geom,
                                               int unit_index, int coarse_index) = 0;
    virtual int max_steps(const PatchGeometry& geom) const = 0;
    /// Continuum backends conserve mass deterministically and are checked.
    virtual bool is_continuum() const = 0;
};

/// Deterministic micro solver: the shrinking-buffer fine-grid finite-volume
/// scheme. One fine bin per side is discarded per micro step; outer-boundary
/// units enforce the zero-density wall with a sign-flipped ghost bin.
class FvMicroBackend : public MicroBackend {
  public:
    explicit FvMicroBackend(const ModelParams& params) : params_(params) {}
    std::unique_ptr<UnitRun> init_unit(const QuadraticReconstruction& rec,
                                       const PatchGeometry& geom, int unit_index,
                                       int coarse_index) override;
    int max_steps(const PatchGeometry& geom) const override { return geom.n_b; }
    bool is_continuum() const override { return true; }

  private:
    ModelParams params_;
};

/// Stochastic micro solver: replicated agent simulations per unit. Tooth-edge
/// fluxes come from counting signed agent crossings; outer-boundary units
/// absorb agents at +-1 as buy/sell events.
class AgentMicroBackend : public MicroBackend {
  public:
    AgentMicroBackend(const ModelParams& params, double n_agents_total,
                      int n_realizations, int n_micro_steps, std::uint64_t seed,
                      double reinjection_offset)
        : params_(params),
          n_agents_(n_agents_total),
          n_real_(n_realizations),
          n_steps_(n_micro_steps),
          seed_(seed),
          offset_(reinjection_offset) {}

    std::unique_ptr<UnitRun> init_unit(const QuadraticReconstruction& rec,
                                       const PatchGeometry& geom, int unit_index,
                                       int coarse_index) override;
    int max_steps(const PatchGeometry&) const override { return n_steps_; }
    bool is_continuum() const override { return false; }

  private:
    ModelParams params_;
    double n_agents_;
    int n_real_;
    int n_steps_;
    std::uint64_t seed_;
    double offset_;
};

enum class FeedbackMode { frozen, per_micro_step };

struct PatchRunConfig {
    double dt_micro = 0.0;
    int n_b_steps = 0;       // micro steps per coarse step
    int m_project = 0;       // projection multiplier M; outer step (M+1)*delta_t
    int n_realizations = 1;
    std::uint64_t seed = 0;
    FeedbackMode feedback = FeedbackMode::frozen;
    int workers = 1;

    double delta_t() const { return n_b_steps * dt_micro; }
    double outer_dt() const { return (m_project + 1) * delta_t(); }
};

/// Per-step mean tooth-edge fluxes, one entry per tooth.
struct ToothFluxes {
    std::vector<double> left;
    std::vector<double> right;
};

struct StepDiagnostics {
    double mass = 0.0;
    Rates rates;              // boundary rates measured during this coarse step
    double clipped_mass = 0.0;
};

/// Conservative macro update: teeth by their edge-flux divergence over L_T = H,
/// gaps by the neighboring tooth fluxes over their true width; the gap holding
/// x = 0 receives the reinjected boundary outflow (R+ + R-). Interior fluxes
/// telescope, so total mass changes only by roundoff.
MacroState apply_flux_update(const MacroState& state, const PatchGeometry& geom,
                             const ToothFluxes& fluxes, double delta_t);

/// One coarse step: lift every unit, run the micro backend for n_b_steps,
/// average the tooth-edge fluxes, and update the macro state.
std::pair<MacroState, StepDiagnostics> gap_tooth_step(
    const MacroState& state, const PatchGeometry& geom, const ModelParams& params,
    MicroBackend& backend, const PatchRunConfig& config, const Rates& rates_in,
    int coarse_index = 0);

/// Forward-Euler projection: U^{n+1} = U^n + (M+1) * (U^{n+d} - U^n).
MacroState projective_step(const MacroState& state_n, const MacroState& state_n_delta,
                           const PatchRunConfig& config);

struct Trajectory {
    std::vector<MacroState> states;        // initial state plus one per outer step
    std::vector<StepDiagnostics> diags;    // one per outer step
    double space_fraction = 0.0;           // = alpha
    double time_fraction = 0.0;            // = 1 / (M + 1)
};

Trajectory run_patch_dynamics(const MacroState& initial, const PatchGeometry& geom,
                              const ModelParams& params, MicroBackend& backend,
                              const PatchRunConfig& config, int n_outer);

/// Lift helper used by the engine: interior or boundary variant per index.
QuadraticReconstruction lift_unit(const MacroState& state, const PatchGeometry& geom,
                                  int unit_index);

}  // namespace patchdyn
