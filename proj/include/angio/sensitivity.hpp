#pragma once

#include <string>
#include <vector>

namespace angio {

enum class SensitivityFamily { saturating_power, linear_saturating, truncated_linear, tabulated };

std::string to_string(SensitivityFamily family);
SensitivityFamily sensitivity_family_from_string(const std::string& name);

/// Chemotactic sensitivity V with its analytic derivative.
///
/// V is defined on [0, inf) by the family formula and extended to negative
/// arguments as an odd function, which keeps it C^1 whenever V(0) = 0.
class SensitivitySpec {
public:
    /// s^alpha / (1 + s^alpha), alpha >= 1.
    static SensitivitySpec saturating_power(double alpha);
    /// s / (1 + s).
    static SensitivitySpec linear_saturating();
    /// min(s, vmax); vmax = 0 gives V = 0.
    static SensitivitySpec truncated_linear(double vmax);
    /// Monotone cubic (Fritsch-Carlson) interpolant through (s_i, V_i); the
    /// table must start at s = 0 and be strictly increasing in s. Beyond the
    /// last knot the end tangent is continued linearly.
    static SensitivitySpec tabulated(std::vector<double> s, std::vector<double> values);

    double operator()(double s) const;
    double derivative(double s) const;

    SensitivityFamily family() const noexcept { return family_; }
    double exponent() const noexcept { return exponent_; }
    double vmax() const noexcept { return vmax_; }
    const std::vector<double>& table_s() const noexcept { return table_s_; }
    const std::vector<double>& table_v() const noexcept { return table_v_; }

private:
    SensitivitySpec() = default;
    double value_nonneg(double s) const;
    double derivative_nonneg(double s) const;

    SensitivityFamily family_ = SensitivityFamily::saturating_power;
    double exponent_ = 1;
    double vmax_ = 0;
    std::vector<double> table_s_, table_v_, table_slope_;
};

/// V(0) = 0, V > 0 and derivative consistency on a log grid s in [1e-8, 1e2].
struct PositivityReport {
    double v_at_zero;
    double min_value;
    double max_derivative_error;
    bool v0_zero;
    bool positive;
    bool derivative_consistent;
    bool pass() const noexcept { return v0_zero && positive; }
};

struct H1Report {
    double k0;
    double j;
    bool pass;
};

struct EnvelopeReport {
    double c_m;
    double C_M;
    bool pass;
};

struct FGDiagnostics {
    double f;
    double g;
};

PositivityReport check_positivity(const SensitivitySpec& spec);

/// Local growth orders of V and |V'| on [delta/100, delta] by log-log least
/// squares; passes when k0 > 1 + d/2 and j > d/2, each with a 0.05 margin.
/// Throws HypothesisViolation if V is not positive on the fit range.
H1Report check_H1(const SensitivitySpec& spec, int dimension, double delta);

/// Bounds c_m <= V(s)/s^alpha <= C_M on (0, s_max]. A ratio that keeps
/// falling (or rising) as the sample grid approaches 0 reports c_m = 0
/// (C_M = inf) and fails.
EnvelopeReport check_growth_envelope(const SensitivitySpec& spec, double alpha, double s_max);

/// f(delta) = sup V^2 and g(delta) = sup (2 (s-delta)_-^2 V'^2 + 2 V^2) over
/// (0, delta], on a 10^4-point uniform grid.
FGDiagnostics f_g_diagnostics(const SensitivitySpec& spec, double delta);

/// Largest |V'| on [0, s_max], sampled.
double max_abs_derivative(const SensitivitySpec& spec, double s_max);

}  // namespace angio
