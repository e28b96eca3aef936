#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "angio/dynamics.hpp"
#include "angio/grid.hpp"
#include "angio/sensitivity.hpp"

namespace angio {

struct DecayFit {
    /// Fitted rate: minus the least-squares slope of log(value) against t.
    double rate;
    double t_start;
    double t_end;
    double r_squared;
    std::size_t samples;
    std::string quantity;

    bool trustworthy() const noexcept { return r_squared >= 0.99; }
};

/// Exponential fit on the samples with t in [t0, t1]. Needs at least 10
/// samples; throws CannotFitError when a value in the window is below 1e-14.
DecayFit fit_decay(std::span<const double> t, std::span<const double> values, double t0, double t1,
                   std::string quantity = {});

enum class Verdict { converged_to_lambda_0, converged_to_0_theta, undecided };

std::string to_string(Verdict v);

struct ClassifyOptions {
    double threshold = 1e-3;
    /// Decay fits use [fit_begin, fit_end] * t_end.
    double fit_begin = 0.5;
    double fit_end = 0.9;
    /// H- and c1-monitors use [late_begin, 1] * t_end.
    double late_begin = 0.5;
    /// Values below this are treated as round-off when choosing a fit window.
    /// The implicit solve leaves a floor near eps * dt / h^2 (about 1e-12 at
    /// n = 513, dt = 0.01) on || u - lambda ||.
    double fit_floor = 1e-9;
    /// Start of the mass-identity audit interval.
    double audit_tau = 1.0;
    /// Fitted v-rate must reach this fraction of alpha(mu) when mu < mu1.
    double v_rate_fraction = 0.85;
    /// Hypothesis checks.
    int dimension = 1;
    double h1_delta = 0.1;
};

struct MassAudit {
    double tau;
    double t;
    /// loss + int int u^2 - (mass(tau) - mass(t))
    double residual;
    double tolerance;
    double scale;
    bool pass() const noexcept { return std::abs(residual) <= tolerance; }
};

struct RegimeReport {
    ModelParams params;
    Grid grid = Grid(1.0, 513);
    StepControl ctrl;
    Verdict verdict = Verdict::undecided;
    double mu1 = 0;
    double alpha_mu = 0;
    std::vector<DecayFit> fits;

    /// Distances to the candidate limit that the verdict (or, when undecided,
    /// the nearer candidate) refers to: L-inf for u, L2 (theta) / L-inf (0) for v.
    double final_dist_u = 0;
    double final_dist_v = 0;
    double dist_lambda_u = 0;
    double dist_lambda_v = 0;
    std::optional<double> dist_theta_u;
    std::optional<double> dist_theta_v;
    /// || theta_mu ||_2 when mu > mu1.
    std::optional<double> theta_l2;
    /// Discrete H1 seminorm of the final u.
    double h1_seminorm_u = 0;

    std::optional<double> v_rate;
    std::optional<double> u_rate;
    std::optional<bool> v_rate_ok;
    std::optional<MassAudit> mass_audit;

    bool positivity_ok = true;
    double min_u_all = 0;
    double min_v_all = 0;
    /// min over the late window of min_x u (delta_0 of the H-hypothesis) and of
    /// min_x v (the lower bound c1).
    double min_u_late = 0;
    double min_v_late = 0;

    PositivityReport v_positivity{};
    std::optional<H1Report> h1;
    std::optional<EnvelopeReport> envelope;
    double envelope_alpha = 1;
    std::vector<std::string> notes;
};

/// Mass identity over [tau, final time]; only meaningful for lambda = 0.
MassAudit audit_mass(const Trajectory& traj, double tau);

RegimeReport classify_regime(const Trajectory& traj, const ClassifyOptions& opts = {});

/// Same, with mu1 and theta_mu supplied (theta only needed when mu > mu1).
RegimeReport classify_regime(const Trajectory& traj, double mu1, const std::optional<FieldD>& theta,
                             const ClassifyOptions& opts = {});

struct SweepBase {
    Grid grid = Grid(1.0, 513);
    ModelParams params;
    StepControl ctrl;
    double u0 = 0.5;
    double v0 = 0.5;
    double bump = 0;
    ClassifyOptions classify;
    /// 0 picks the hardware concurrency.
    unsigned threads = 0;
};

struct SweepRow {
    double lambda;
    double mu;
    std::optional<RegimeReport> report;
    std::string error;
};

/// Cartesian product lambda x mu, one classified run per cell, rows ordered
/// lambda-major. A failing cell records its error and the sweep continues.
std::vector<SweepRow> sweep(const std::vector<double>& lambdas, const std::vector<double>& mus, const SweepBase& base);

}  // namespace angio
