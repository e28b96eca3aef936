#pragma once

#include <cstddef>
#include <vector>

#include "angio/errors.hpp"
#include "angio/grid.hpp"
#include "angio/sensitivity.hpp"

namespace angio {

/// Parameters of the coupled system
///   u_t = u'' - (V(u) v')' + lambda u - u^2
///   v_t = v'' - v - c u v
/// with u' = 0 on both ends, v' = 0 at Gamma1 and v' = mu v/(1+v) at Gamma2.
struct ModelParams {
    double lambda = 0;
    double mu = 0.5;
    double c = 1;
    SensitivitySpec V = SensitivitySpec::saturating_power(2);

    void validate() const;
};

struct SimState {
    double t;
    FieldD u;
    FieldD v;
};

struct StepControl {
    /// Largest step taken; the CFL bound may shrink it further.
    double dt = 0.01;
    double t_end = 40;
    int output_every = 100;
    double dt_safety = 0.4;
    /// Ignore `dt` and step at the CFL bound, capped by dt_max. The explicit
    /// decay terms lose accuracy well before they lose positivity, hence the cap.
    bool auto_dt = false;
    double dt_max = 0.01;

    void validate() const;
};

/// Per-snapshot running diagnostics. The cumulative integrals use the
/// trapezoid rule over every accepted step.
struct Diagnostics {
    double mass_u;
    double mass_v;
    double linf_u;
    double linf_v;
    double min_u;
    double min_v;
    /// mu v/(1+v) at Gamma2.
    double boundary_flux_v;
    /// || u - lambda ||_2
    double l2_u_minus_lambda;
    /// int_0^t int u^2
    double cum_u_squared;
    /// int_0^t mu V(u) v/(1+v) at Gamma2 (mass of u leaving through Gamma2)
    double cum_boundary_loss;
};

struct Snapshot {
    SimState state;
    Diagnostics diag;
    std::size_t step_index;
};

struct Trajectory {
    Grid grid;
    ModelParams params;
    StepControl ctrl;
    std::vector<Snapshot> snapshots;
    /// Diagnostics after every accepted step (and at t = 0), with their times.
    std::vector<double> times;
    std::vector<Diagnostics> history;
    /// Every accepted step size, in order.
    std::vector<double> step_sizes;
    /// Extremes over every accepted step, not only snapshots.
    double min_u_all = 0;
    double min_v_all = 0;
    double max_dt = 0;

    const Snapshot& final_snapshot() const { return snapshots.back(); }
};

/// Raised by run(); holds everything computed before the failure.
class RunError : public Error {
public:
    RunError(const std::string& what, Trajectory partial) : Error(what), partial_(std::move(partial)) {}
    const Trajectory& partial() const noexcept { return partial_; }

private:
    Trajectory partial_;
};

/// One IMEX Euler step of size dt: diffusion (and the lagged Robin row of v)
/// implicit, chemotaxis / logistic / decay terms explicit.
SimState step(const SimState& state, const ModelParams& p, double dt);
SimState step(const SimState& state, const ModelParams& p, const StepControl& ctrl);

/// Step size bound keeping the explicit terms positivity-preserving:
/// dt_safety * min(h / drift_speed, 0.5 / max(|lambda| + 2|u|, 1 + c|u|)).
double cfl_dt(const SimState& state, const ModelParams& p, double dt_safety);

Diagnostics diagnostics(const SimState& state, const ModelParams& p);

/// Integrates from t = 0 to ctrl.t_end; snapshots at step 0, every
/// output_every steps, and at t_end.
Trajectory run(const FieldD& u0, const FieldD& v0, const ModelParams& p, const StepControl& ctrl);

/// Replays the step sizes of `traj` on  w_t = w'' - w,  w' = mu w at Gamma2,
/// w(0) = v0, with the same IMEX treatment as v. Returns w at every snapshot.
/// This linear problem is a supersolution of the coupled v-equation.
std::vector<FieldD> linear_supersolution(const Trajectory& traj, const FieldD& v0);

/// Initial data: constant level plus an optional cosine hump
/// amplitude * (1 + cos(pi x / L)) / 2, which is largest at Gamma1.
FieldD initial_profile(const Grid& grid, double level, double bump_amplitude = 0);

}  // namespace angio
