#include "angio/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "angio/elliptic.hpp"

namespace angio {

void ModelParams::validate() const {
    if (!std::isfinite(lambda)) throw DomainConfigError("lambda must be finite");
    if (!std::isfinite(mu)) throw DomainConfigError("mu must be finite");
    if (!(c > 0) || !std::isfinite(c)) throw DomainConfigError("c must be positive");
}

void StepControl::validate() const {
    if (!(dt > 0) || !std::isfinite(dt)) throw DomainConfigError("dt must be positive");
    if (!(t_end > 0) || !std::isfinite(t_end)) throw DomainConfigError("t_end must be positive");
    if (output_every < 1) throw DomainConfigError("output_every must be >= 1");
    if (!(dt_safety > 0 && dt_safety <= 1)) throw DomainConfigError("dt_safety must lie in (0, 1]");
    if (!(dt_max > 0) || !std::isfinite(dt_max)) throw DomainConfigError("dt_max must be positive");
}

namespace {

constexpr double kPositivityTolerance = 1e-9;

double boundary_flux(const ModelParams& p, double v_gamma2) { return p.mu * v_gamma2 / (1 + v_gamma2); }

// Face gradients (v[i+1] - v[i]) / h for the n-1 interior faces.
Vector<double> face_gradients(const Grid& grid, const Vector<double>& v) {
    const Eigen::Index n = grid.size();
    return (v.tail(n - 1) - v.head(n - 1)) / grid.spacing();
}

// -(V(u) v')' on control volumes: h wide inside, h/2 at the two ends. The
// face flux takes u from the upwind side of the drift, which points up the
// gradient of v. At Gamma2 the flux is V(u) times the boundary flux of v.
Vector<double> chemotaxis_term(const Grid& grid, const Vector<double>& u, const Vector<double>& v,
                               const ModelParams& p) {
    const Eigen::Index n = grid.size();
    const double h = grid.spacing();
    const Vector<double> grad = face_gradients(grid, v);
    Vector<double> flux(n + 1);
    flux[0] = 0;
    for (Eigen::Index f = 0; f < n - 1; ++f) {
        const double g = grad[f];
        flux[f + 1] = g == 0 ? 0.0 : p.V(g > 0 ? u[f] : u[f + 1]) * g;
    }
    flux[n] = p.V(u[n - 1]) * boundary_flux(p, v[n - 1]);

    Vector<double> out(n);
    out[0] = -(flux[1] - flux[0]) / (h / 2);
    for (Eigen::Index i = 1; i < n - 1; ++i) out[i] = -(flux[i + 1] - flux[i]) / h;
    out[n - 1] = -(flux[n] - flux[n - 1]) / (h / 2);
    return out;
}

void check_state(const Vector<double>& w, const char* name) {
    if (!w.allFinite()) throw PositivityFailure(std::string(name) + " became non-finite");
    if (w.minCoeff() < -kPositivityTolerance)
        throw PositivityFailure(std::string(name) + " went negative (" + std::to_string(w.minCoeff()) +
                                "); the step is too large");
}

}  // namespace

SimState step(const SimState& state, const ModelParams& p, double dt) {
    if (!(dt > 0)) throw DomainConfigError("dt must be positive");
    const Grid& grid = state.u.grid();
    const Vector<double>& u = state.u.values();
    const Vector<double>& v = state.v.values();
    const auto mass = FieldD::constant(grid, 1 / dt);

    Vector<double> rhs_u = u / dt + chemotaxis_term(grid, u, v, p);
    rhs_u.array() += (p.lambda - u.array()) * u.array();
    const auto op_u = assemble(grid, mass, BoundarySpec<double>::neumann());
    Vector<double> u_next = solve_linear(op_u, rhs_u);

    // lagged Robin row: v' = mu v_new / (1 + v_old) at Gamma2
    const double slope = p.mu / (1 + v[grid.size() - 1]);
    Vector<double> rhs_v = v / dt;
    rhs_v.array() -= (1 + p.c * u.array()) * v.array();
    const auto op_v = assemble(grid, mass, BoundarySpec<double>::flux_slope(slope));
    Vector<double> v_next = solve_linear(op_v, rhs_v);

    check_state(u_next, "u");
    check_state(v_next, "v");
    return {state.t + dt, FieldD(grid, std::move(u_next)), FieldD(grid, std::move(v_next))};
}

SimState step(const SimState& state, const ModelParams& p, const StepControl& ctrl) {
    return step(state, p, ctrl.dt);
}

double cfl_dt(const SimState& state, const ModelParams& p, double dt_safety) {
    const Grid& grid = state.u.grid();
    const double u_max = state.u.values().cwiseAbs().maxCoeff();
    const Vector<double> grad = face_gradients(grid, state.v.values());
    const double grad_max = std::max(grad.cwiseAbs().maxCoeff(), std::abs(boundary_flux(p, state.v.at_gamma2())));
    // end nodes own half a cell, so their faces act twice as fast
    const double speed = 2 * max_abs_derivative(p.V, u_max) * grad_max;
    const double advective = grid.spacing() / std::max(speed, 1e-12);
    const double reaction = 0.5 / std::max(std::abs(p.lambda) + 2 * u_max, 1 + p.c * u_max);
    return dt_safety * std::min(advective, reaction);
}

Diagnostics diagnostics(const SimState& state, const ModelParams& p) {
    const auto& u = state.u.values();
    const auto& v = state.v.values();
    const double flux = boundary_flux(p, state.v.at_gamma2());
    return {integrate(state.u),
            integrate(state.v),
            norm(state.u, NormKind::Linf),
            norm(state.v, NormKind::Linf),
            u.minCoeff(),
            v.minCoeff(),
            flux,
            norm(state.u.grid(), (u.array() - p.lambda).matrix(), NormKind::L2),
            0,
            0};
}

namespace {

double u_squared_integral(const SimState& s) { return integrate(s.u.grid(), s.u.values().array().square()); }

double boundary_loss(const SimState& s, const ModelParams& p) {
    return p.V(s.u.at_gamma2()) * boundary_flux(p, s.v.at_gamma2());
}

}  // namespace

Trajectory run(const FieldD& u0, const FieldD& v0, const ModelParams& p, const StepControl& ctrl) {
    p.validate();
    ctrl.validate();
    if (!(u0.grid() == v0.grid())) throw DomainConfigError("u0 and v0 live on different grids");
    if (u0.values().minCoeff() < 0 || v0.values().minCoeff() < 0)
        throw DomainConfigError("initial data must be nonnegative");
    if (u0.values().maxCoeff() == 0 || v0.values().maxCoeff() == 0)
        throw DomainConfigError("initial data must not vanish identically");

    Trajectory traj{u0.grid(), p, ctrl, {}, {}, {}, {}, u0.values().minCoeff(), v0.values().minCoeff(), 0};
    SimState state{0, u0, v0};
    Diagnostics diag = diagnostics(state, p);
    traj.snapshots.push_back({state, diag, 0});
    traj.times.push_back(0);
    traj.history.push_back(diag);

    double u2_prev = u_squared_integral(state);
    double loss_prev = boundary_loss(state, p);
    std::size_t steps = 0;
    const double t_end = ctrl.t_end;
    try {
        while (state.t < t_end * (1 - 1e-14)) {
            const double bound = cfl_dt(state, p, ctrl.dt_safety);
            double dt = std::min(ctrl.auto_dt ? ctrl.dt_max : ctrl.dt, bound);
            // land exactly on t_end; absorb a sliver rather than take a tiny step
            if (state.t + dt * (1 + 1e-9) >= t_end) dt = t_end - state.t;
            SimState next = step(state, p, dt);
            if (next.t > t_end * (1 - 1e-14)) next.t = t_end;
            ++steps;

            const double u2 = u_squared_integral(next);
            const double loss = boundary_loss(next, p);
            const double cum_u2 = diag.cum_u_squared + 0.5 * dt * (u2_prev + u2);
            const double cum_loss = diag.cum_boundary_loss + 0.5 * dt * (loss_prev + loss);
            u2_prev = u2;
            loss_prev = loss;
            state = std::move(next);

            diag = diagnostics(state, p);
            diag.cum_u_squared = cum_u2;
            diag.cum_boundary_loss = cum_loss;
            traj.step_sizes.push_back(dt);
            traj.times.push_back(state.t);
            traj.history.push_back(diag);
            traj.max_dt = std::max(traj.max_dt, dt);
            traj.min_u_all = std::min(traj.min_u_all, diag.min_u);
            traj.min_v_all = std::min(traj.min_v_all, diag.min_v);

            const bool last = !(state.t < t_end * (1 - 1e-14));
            if (last || steps % static_cast<std::size_t>(ctrl.output_every) == 0)
                traj.snapshots.push_back({state, diag, steps});
        }
    } catch (const Error& e) {
        throw RunError(std::string("run aborted at t = ") + std::to_string(state.t) + ": " + e.what(),
                       std::move(traj));
    }
    return traj;
}

std::vector<FieldD> linear_supersolution(const Trajectory& traj, const FieldD& v0) {
    const Grid& grid = traj.grid;
    const double mu = traj.params.mu;
    std::vector<FieldD> out;
    out.reserve(traj.snapshots.size());
    Vector<double> w = v0.values();
    std::size_t next_snapshot = 0;
    auto record = [&](std::size_t steps) {
        while (next_snapshot < traj.snapshots.size() && traj.snapshots[next_snapshot].step_index == steps) {
            out.emplace_back(grid, w);
            ++next_snapshot;
        }
    };
    record(0);
    for (std::size_t k = 0; k < traj.step_sizes.size(); ++k) {
        const double dt = traj.step_sizes[k];
        const auto op = assemble(grid, FieldD::constant(grid, 1 / dt), BoundarySpec<double>::flux_slope(mu));
        Vector<double> rhs = w / dt - w;
        w = solve_linear(op, rhs);
        record(k + 1);
    }
    return out;
}

FieldD initial_profile(const Grid& grid, double level, double bump_amplitude) {
    const double L = grid.length();
    return FieldD::from_function(grid, [&](double x) {
        return level + bump_amplitude * 0.5 * (1 + std::cos(std::numbers::pi * x / L));
    });
}

}  // namespace angio
