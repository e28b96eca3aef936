#include "angio/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "angio/spectral.hpp"
#include "angio/steady.hpp"

namespace angio {

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::converged_to_lambda_0: return "converged-to-(lambda,0)";
        case Verdict::converged_to_0_theta: return "converged-to-(0,theta_mu)";
        case Verdict::undecided: return "undecided";
    }
    return "unknown";
}

DecayFit fit_decay(std::span<const double> t, std::span<const double> values, double t0, double t1,
                   std::string quantity) {
    if (t.size() != values.size()) throw CannotFitError("time and value series differ in length");
    constexpr double floor = 1e-14;
    const double slack = 1e-12 * std::max(1.0, std::abs(t1));
    std::vector<double> x, y;
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (t[k] < t0 - slack || t[k] > t1 + slack) continue;
        if (!(values[k] > floor))
            throw CannotFitError(quantity + " is at or below " + std::to_string(floor) + " inside the fit window");
        x.push_back(t[k]);
        y.push_back(std::log(values[k]));
    }
    if (x.size() < 10) throw CannotFitError("fewer than 10 samples of " + quantity + " in the fit window");

    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        mx += x[k];
        my += y[k];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxx += (x[k] - mx) * (x[k] - mx);
        sxy += (x[k] - mx) * (y[k] - my);
        syy += (y[k] - my) * (y[k] - my);
    }
    const double slope = sxy / sxx;
    const double ss_res = std::max(0.0, syy - slope * sxy);
    // a flat series is fitted exactly by slope 0
    const double r2 = syy <= 1e-300 ? 1.0 : std::clamp(1 - ss_res / syy, 0.0, 1.0);
    return {-slope, x.front(), x.back(), r2, x.size(), std::move(quantity)};
}

namespace {

// Fit window: the default window cut off where the series drops to round-off.
// When less than half of it remains, fall back to [t_f / 2, t_f], with t_f the last
// sample before the first one below the floor.
std::optional<std::pair<double, double>> choose_window(const std::vector<double>& t, const std::vector<double>& y,
                                                       double a, double b, double floor) {
    double t_floor = t.back();
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (!(y[k] > floor)) {
            if (k == 0) return std::nullopt;
            t_floor = t[k - 1];
            break;
        }
    }
    auto count = [&](double lo, double hi) {
        return std::count_if(t.begin(), t.end(), [&](double s) { return s >= lo && s <= hi; });
    };
    const double hi = std::min(b, t_floor);
    if (hi - a >= 0.5 * (b - a) && count(a, hi) >= 10) return std::pair{a, hi};
    if (count(t_floor / 2, t_floor) >= 10) return std::pair{t_floor / 2, t_floor};
    return std::nullopt;
}

std::optional<DecayFit> try_fit(const std::vector<double>& t, const std::vector<double>& y, double a, double b,
                                const ClassifyOptions& opts, const std::string& name,
                                std::vector<std::string>& notes) {
    const auto window = choose_window(t, y, a, b, opts.fit_floor);
    if (!window) {
        notes.push_back("no usable window to fit " + name);
        return std::nullopt;
    }
    if (window->first != a || window->second != b)
        notes.push_back("fit window of " + name + " moved to [" + std::to_string(window->first) + ", " +
                        std::to_string(window->second) + "] to stay above round-off");
    try {
        return fit_decay(t, y, window->first, window->second, name);
    } catch (const CannotFitError& e) {
        notes.push_back(e.what());
        return std::nullopt;
    }
}

double h1_seminorm(const FieldD& f) {
    const double h = f.grid().spacing();
    const auto& w = f.values();
    const Eigen::Index n = w.size();
    return std::sqrt((w.tail(n - 1) - w.head(n - 1)).squaredNorm() / h);
}

}  // namespace

MassAudit audit_mass(const Trajectory& traj, double tau) {
    const auto& ts = traj.times;
    const std::size_t ia = std::min<std::size_t>(
        std::lower_bound(ts.begin(), ts.end(), tau - 1e-12) - ts.begin(), ts.size() - 1);
    const Diagnostics& a = traj.history[ia];
    const Diagnostics& b = traj.history.back();
    const double loss = b.cum_boundary_loss - a.cum_boundary_loss;
    const double absorbed = b.cum_u_squared - a.cum_u_squared;
    const double drop = a.mass_u - b.mass_u;
    const double scale = std::max({std::abs(a.mass_u), std::abs(b.mass_u), std::abs(loss), std::abs(absorbed)});
    const double h = traj.grid.spacing();
    const double tol = 10 * (traj.max_dt + h * h) * traj.ctrl.t_end * scale;
    return {ts[ia], ts.back(), loss + absorbed - drop, tol, scale};
}

RegimeReport classify_regime(const Trajectory& traj, const ClassifyOptions& opts) {
    const double mu1 = compute_mu1(traj.grid);
    std::optional<FieldD> theta;
    if (traj.params.mu > mu1) theta = theta_mu(traj.grid, traj.params.mu, mu1);
    return classify_regime(traj, mu1, theta, opts);
}

RegimeReport classify_regime(const Trajectory& traj, double mu1, const std::optional<FieldD>& theta,
                             const ClassifyOptions& opts) {
    const ModelParams& p = traj.params;
    const Grid& grid = traj.grid;
    RegimeReport r;
    r.params = p;
    r.grid = grid;
    r.ctrl = traj.ctrl;
    r.mu1 = mu1;
    try {
        r.alpha_mu = alpha_of_mu(grid, p.mu);
    } catch (const Error& e) {
        r.alpha_mu = std::nan("");
        r.notes.push_back(std::string("alpha(mu) failed: ") + e.what());
    }

    const Snapshot& last = traj.final_snapshot();
    const FieldD& u = last.state.u;
    const FieldD& v = last.state.v;
    r.dist_lambda_u = (u.values().array() - p.lambda).abs().maxCoeff();
    r.dist_lambda_v = norm(v, NormKind::Linf);
    const bool near_lambda = r.dist_lambda_u < opts.threshold && r.dist_lambda_v < opts.threshold;
    bool near_theta = false;
    if (theta) {
        r.dist_theta_u = norm(u, NormKind::Linf);
        r.dist_theta_v = norm(v - *theta, NormKind::L2);
        r.theta_l2 = norm(*theta, NormKind::L2);
        near_theta = *r.dist_theta_u < opts.threshold && *r.dist_theta_v < opts.threshold;
    }
    r.verdict = near_lambda ? Verdict::converged_to_lambda_0
                            : near_theta ? Verdict::converged_to_0_theta : Verdict::undecided;
    bool use_theta = r.verdict == Verdict::converged_to_0_theta;
    if (r.verdict == Verdict::undecided && theta)
        use_theta = std::max(*r.dist_theta_u, *r.dist_theta_v) < std::max(r.dist_lambda_u, r.dist_lambda_v);
    r.final_dist_u = use_theta ? *r.dist_theta_u : r.dist_lambda_u;
    r.final_dist_v = use_theta ? *r.dist_theta_v : r.dist_lambda_v;
    r.h1_seminorm_u = h1_seminorm(u);

    const std::vector<double>& t = traj.times;
    std::vector<double> linf_v, l2_u;
    for (const auto& d : traj.history) {
        linf_v.push_back(d.linf_v);
        l2_u.push_back(d.l2_u_minus_lambda);
    }
    const double t_end = traj.ctrl.t_end;
    const double a = opts.fit_begin * t_end, b = opts.fit_end * t_end;
    if (p.mu < mu1) {
        if (auto fit = try_fit(t, linf_v, a, b, opts, "linf_v", r.notes)) {
            r.v_rate = fit->rate;
            r.v_rate_ok = fit->rate >= opts.v_rate_fraction * r.alpha_mu;
            r.fits.push_back(*fit);
        }
    }
    if (p.lambda > 0) {
        if (auto fit = try_fit(t, l2_u, a, b, opts, "l2_u_minus_lambda", r.notes)) {
            r.u_rate = fit->rate;
            r.fits.push_back(*fit);
        }
    }
    if (p.lambda == 0) r.mass_audit = audit_mass(traj, opts.audit_tau);

    r.min_u_all = traj.min_u_all;
    r.min_v_all = traj.min_v_all;
    r.positivity_ok = traj.min_u_all >= -1e-12 && traj.min_v_all >= -1e-12;
    r.min_u_late = std::numeric_limits<double>::infinity();
    r.min_v_late = std::numeric_limits<double>::infinity();
    double s_max = 0;
    for (std::size_t k = 0; k < traj.history.size(); ++k) {
        const Diagnostics& d = traj.history[k];
        s_max = std::max(s_max, d.linf_u);
        if (traj.times[k] >= opts.late_begin * t_end - 1e-12) {
            r.min_u_late = std::min(r.min_u_late, d.min_u);
            r.min_v_late = std::min(r.min_v_late, d.min_v);
        }
    }

    r.v_positivity = check_positivity(p.V);
    try {
        r.h1 = check_H1(p.V, opts.dimension, opts.h1_delta);
    } catch (const HypothesisViolation& e) {
        r.notes.push_back(std::string("H1 check: ") + e.what());
    }
    r.envelope_alpha = p.V.family() == SensitivityFamily::saturating_power ? p.V.exponent() : 1.0;
    r.envelope = check_growth_envelope(p.V, r.envelope_alpha, std::max(s_max, 1e-3));
    if (r.verdict == Verdict::undecided && p.lambda > 0 && p.mu < mu1 && r.h1 && !r.h1->pass)
        r.notes.push_back("hypothesis unmet: V does not satisfy H1, convergence to (lambda,0) is not guaranteed");
    if (r.verdict == Verdict::undecided && p.lambda == 0 && p.mu > mu1 && !r.envelope->pass)
        r.notes.push_back("hypothesis unmet: V has no power envelope");
    return r;
}

std::vector<SweepRow> sweep(const std::vector<double>& lambdas, const std::vector<double>& mus, const SweepBase& base) {
    if (lambdas.empty() || mus.empty()) throw DomainConfigError("sweep lists must be nonempty");
    std::vector<SweepRow> rows;
    for (double l : lambdas)
        for (double m : mus) rows.push_back({l, m, std::nullopt, {}});

    double mu1 = 0;
    std::string mu1_error;
    try {
        mu1 = compute_mu1(base.grid);
    } catch (const Error& e) {
        mu1_error = e.what();
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < rows.size(); k = next++) {
            SweepRow& row = rows[k];
            if (!mu1_error.empty()) {
                row.error = "mu1: " + mu1_error;
                continue;
            }
            try {
                ModelParams p = base.params;
                p.lambda = row.lambda;
                p.mu = row.mu;
                const auto u0 = initial_profile(base.grid, base.u0, base.bump);
                const auto v0 = initial_profile(base.grid, base.v0, base.bump);
                const Trajectory traj = run(u0, v0, p, base.ctrl);
                std::optional<FieldD> theta;
                if (p.mu > mu1) theta = theta_mu(base.grid, p.mu, mu1);
                row.report = classify_regime(traj, mu1, theta, base.classify);
            } catch (const std::exception& e) {
                row.error = e.what();
            }
        }
    };
    unsigned threads = base.threads ? base.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(rows.size()));
    std::vector<std::thread> pool;
    for (unsigned k = 1; k < threads; ++k) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    return rows;
}

}  // namespace angio
