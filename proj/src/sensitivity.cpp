#include "angio/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "angio/errors.hpp"

namespace angio {

std::string to_string(SensitivityFamily family) {
    switch (family) {
        case SensitivityFamily::saturating_power: return "saturating-power";
        case SensitivityFamily::linear_saturating: return "linear-saturating";
        case SensitivityFamily::truncated_linear: return "truncated-linear";
        case SensitivityFamily::tabulated: return "tabulated";
    }
    return "unknown";
}

SensitivityFamily sensitivity_family_from_string(const std::string& name) {
    for (auto f : {SensitivityFamily::saturating_power, SensitivityFamily::linear_saturating,
                   SensitivityFamily::truncated_linear, SensitivityFamily::tabulated})
        if (to_string(f) == name) return f;
    throw DomainConfigError("unknown sensitivity family '" + name + "'");
}

SensitivitySpec SensitivitySpec::saturating_power(double alpha) {
    if (!(alpha >= 1) || !std::isfinite(alpha))
        throw DomainConfigError("saturating-power exponent must be finite and >= 1");
    SensitivitySpec s;
    s.family_ = SensitivityFamily::saturating_power;
    s.exponent_ = alpha;
    return s;
}

SensitivitySpec SensitivitySpec::linear_saturating() {
    SensitivitySpec s;
    s.family_ = SensitivityFamily::linear_saturating;
    s.exponent_ = 1;
    return s;
}

SensitivitySpec SensitivitySpec::truncated_linear(double vmax) {
    if (!(vmax >= 0) || !std::isfinite(vmax)) throw DomainConfigError("truncated-linear vmax must be >= 0");
    SensitivitySpec s;
    s.family_ = SensitivityFamily::truncated_linear;
    s.vmax_ = vmax;
    return s;
}

SensitivitySpec SensitivitySpec::tabulated(std::vector<double> xs, std::vector<double> vs) {
    if (xs.size() < 2 || xs.size() != vs.size()) throw DomainConfigError("tabulated V needs >= 2 matching points");
    if (xs.front() != 0) throw DomainConfigError("tabulated V must start at s = 0");
    for (std::size_t k = 0; k < xs.size(); ++k) {
        if (!std::isfinite(xs[k]) || !std::isfinite(vs[k])) throw DomainConfigError("tabulated V has non-finite entries");
        if (k > 0 && !(xs[k] > xs[k - 1])) throw DomainConfigError("tabulated s must be strictly increasing");
    }
    const std::size_t m = xs.size();
    std::vector<double> secant(m - 1), slope(m);
    for (std::size_t k = 0; k + 1 < m; ++k) secant[k] = (vs[k + 1] - vs[k]) / (xs[k + 1] - xs[k]);
    // three-point end tangents, clipped to keep the ends monotone
    auto end_slope = [](double h0, double h1, double d0, double d1) {
        const double d = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (d * d0 <= 0) return 0.0;
        if (d0 * d1 <= 0 && std::abs(d) > 3 * std::abs(d0)) return 3 * d0;
        return d;
    };
    if (m == 2) {
        slope.front() = slope.back() = secant.front();
    } else {
        slope.front() = end_slope(xs[1] - xs[0], xs[2] - xs[1], secant[0], secant[1]);
        slope.back() = end_slope(xs[m - 1] - xs[m - 2], xs[m - 2] - xs[m - 3], secant[m - 2], secant[m - 3]);
    }
    for (std::size_t k = 1; k + 1 < m; ++k) {
        if (secant[k - 1] * secant[k] <= 0) {
            slope[k] = 0;
            continue;
        }
        const double h0 = xs[k] - xs[k - 1], h1 = xs[k + 1] - xs[k];
        const double w1 = 2 * h1 + h0, w2 = h1 + 2 * h0;
        slope[k] = (w1 + w2) / (w1 / secant[k - 1] + w2 / secant[k]);
    }
    SensitivitySpec s;
    s.family_ = SensitivityFamily::tabulated;
    s.table_s_ = std::move(xs);
    s.table_v_ = std::move(vs);
    s.table_slope_ = std::move(slope);
    return s;
}

double SensitivitySpec::value_nonneg(double s) const {
    switch (family_) {
        case SensitivityFamily::saturating_power: {
            const double p = std::pow(s, exponent_);
            return p / (1 + p);
        }
        case SensitivityFamily::linear_saturating: return s / (1 + s);
        case SensitivityFamily::truncated_linear: return std::min(s, vmax_);
        case SensitivityFamily::tabulated: {
            const auto& xs = table_s_;
            if (s >= xs.back()) return table_v_.back() + table_slope_.back() * (s - xs.back());
            const std::size_t k = std::upper_bound(xs.begin(), xs.end(), s) - xs.begin() - 1;
            const double h = xs[k + 1] - xs[k], t = (s - xs[k]) / h;
            const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
            const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
            return h00 * table_v_[k] + h10 * h * table_slope_[k] + h01 * table_v_[k + 1] +
                   h11 * h * table_slope_[k + 1];
        }
    }
    return 0;
}

double SensitivitySpec::derivative_nonneg(double s) const {
    switch (family_) {
        case SensitivityFamily::saturating_power: {
            if (s == 0) return exponent_ == 1 ? 1.0 : 0.0;
            const double p = std::pow(s, exponent_);
            return exponent_ * p / s / ((1 + p) * (1 + p));
        }
        case SensitivityFamily::linear_saturating: return 1 / ((1 + s) * (1 + s));
        case SensitivityFamily::truncated_linear: return s < vmax_ ? 1.0 : 0.0;
        case SensitivityFamily::tabulated: {
            const auto& xs = table_s_;
            if (s >= xs.back()) return table_slope_.back();
            const std::size_t k = std::upper_bound(xs.begin(), xs.end(), s) - xs.begin() - 1;
            const double h = xs[k + 1] - xs[k], t = (s - xs[k]) / h;
            const double d00 = 6 * t * (t - 1), d10 = (1 - t) * (1 - 3 * t);
            const double d01 = -d00, d11 = t * (3 * t - 2);
            return (d00 * table_v_[k] + d01 * table_v_[k + 1]) / h + d10 * table_slope_[k] +
                   d11 * table_slope_[k + 1];
        }
    }
    return 0;
}

double SensitivitySpec::operator()(double s) const {
    return s >= 0 ? value_nonneg(s) : -value_nonneg(-s);
}

double SensitivitySpec::derivative(double s) const {
    return derivative_nonneg(std::abs(s));
}

namespace {

std::vector<double> log_grid(double lo, double hi, int count) {
    std::vector<double> s(count);
    const double a = std::log(lo), b = std::log(hi);
    for (int k = 0; k < count; ++k) s[k] = std::exp(a + (b - a) * k / (count - 1));
    s.front() = lo;
    s.back() = hi;
    return s;
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sx += x[k];
        sy += y[k];
    }
    const double mx = sx / n, my = sy / n;
    double sxy = 0, sxx = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxy += (x[k] - mx) * (y[k] - my);
        sxx += (x[k] - mx) * (x[k] - mx);
    }
    return sxy / sxx;
}

constexpr double kExponentMargin = 0.05;

}  // namespace

PositivityReport check_positivity(const SensitivitySpec& spec) {
    constexpr double eps = 1e-5;
    PositivityReport r{spec(0.0), std::numeric_limits<double>::infinity(), 0, false, true, true};
    r.v0_zero = r.v_at_zero == 0;
    for (double s : log_grid(1e-8, 1e2, 401)) {
        const double v = spec(s);
        r.min_value = std::min(r.min_value, v);
        if (!(v > 0)) r.positive = false;
        // stay clear of s = 0, where the odd extension has a kink in V''
        const double e = std::min(eps, 0.5 * s);
        // a truncated V has a kink at vmax where V' jumps
        if (spec.family() == SensitivityFamily::truncated_linear && std::abs(s - spec.vmax()) <= e) continue;
        const double fd = (spec(s + e) - spec(s - e)) / (2 * e);
        r.max_derivative_error = std::max(r.max_derivative_error, std::abs(fd - spec.derivative(s)));
    }
    r.derivative_consistent = r.max_derivative_error <= 1e-5;
    return r;
}

H1Report check_H1(const SensitivitySpec& spec, int dimension, double delta) {
    if (!(delta > 0 && delta <= 1)) throw DomainConfigError("H1 check requires 0 < delta <= 1");
    if (dimension < 1) throw DomainConfigError("dimension must be >= 1");
    const auto s = log_grid(delta / 100, delta, 201);
    std::vector<double> ls, lv, lsd, ld;
    for (double x : s) {
        const double v = spec(x);
        if (!(v > 0))
            throw HypothesisViolation("V is not positive at s = " + std::to_string(x));
        ls.push_back(std::log(x));
        lv.push_back(std::log(v));
        const double dv = std::abs(spec.derivative(x));
        if (dv > 0) {
            lsd.push_back(std::log(x));
            ld.push_back(std::log(dv));
        }
    }
    H1Report r{ls_slope(ls, lv), std::numeric_limits<double>::infinity(), false};
    // |V'| vanishing on the window satisfies any power bound
    if (lsd.size() >= 2) r.j = ls_slope(lsd, ld);
    const double d = dimension;
    r.pass = r.k0 > 1 + d / 2 + kExponentMargin && r.j > d / 2 + kExponentMargin;
    return r;
}

EnvelopeReport check_growth_envelope(const SensitivitySpec& spec, double alpha, double s_max) {
    if (!(alpha >= 1)) throw DomainConfigError("envelope exponent must be >= 1");
    if (!(s_max > 0)) throw DomainConfigError("envelope range must be positive");
    auto ratio_bounds = [&](double lo) {
        double mn = std::numeric_limits<double>::infinity(), mx = 0;
        for (double s : log_grid(lo, s_max, 2001)) {
            const double r = spec(s) / std::pow(s, alpha);
            mn = std::min(mn, r);
            mx = std::max(mx, r);
        }
        return std::pair{mn, mx};
    };
    const auto [fine_min, fine_max] = ratio_bounds(s_max * 1e-8);
    const auto [coarse_min, coarse_max] = ratio_bounds(s_max * 1e-4);
    EnvelopeReport r{fine_min, fine_max, false};
    if (!(fine_min > 0) || fine_min < 0.5 * coarse_min) r.c_m = 0;
    if (!std::isfinite(fine_max) || fine_max > 2 * coarse_max) r.C_M = std::numeric_limits<double>::infinity();
    r.pass = r.c_m > 0 && r.c_m <= r.C_M && std::isfinite(r.C_M);
    return r;
}

FGDiagnostics f_g_diagnostics(const SensitivitySpec& spec, double delta) {
    if (!(delta > 0)) throw DomainConfigError("delta must be positive");
    constexpr int N = 10000;
    FGDiagnostics out{0, 0};
    for (int k = 1; k <= N; ++k) {
        const double s = delta * k / N;
        const double v = spec(s), dv = spec.derivative(s);
        const double neg = std::min(s - delta, 0.0);
        out.f = std::max(out.f, v * v);
        out.g = std::max(out.g, 2 * neg * neg * dv * dv + 2 * v * v);
    }
    return out;
}

double max_abs_derivative(const SensitivitySpec& spec, double s_max) {
    constexpr int N = 256;
    double m = std::abs(spec.derivative(0.0));
    if (!(s_max > 0)) return m;
    for (int k = 1; k <= N; ++k) m = std::max(m, std::abs(spec.derivative(s_max * k / N)));
    return m;
}

}  // namespace angio
