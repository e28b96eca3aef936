#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <type_traits>

#include "angio/elliptic.hpp"
#include "angio/errors.hpp"
#include "angio/grid.hpp"
#include "angio/spectral.hpp"

namespace angio {

enum class SteadyKind { trivial, u_dominant, v_dominant };

inline std::string to_string(SteadyKind k) {
    switch (k) {
        case SteadyKind::trivial: return "trivial";
        case SteadyKind::u_dominant: return "u-dominant";
        case SteadyKind::v_dominant: return "v-dominant";
    }
    return "unknown";
}

template <typename Scalar>
struct SteadyState {
    Field<Scalar> u_part;
    Field<Scalar> v_part;
    SteadyKind kind;
    /// Infinity norm of the stationary residual in control-volume form, the
    /// same measure the Newton solver converges in.
    Scalar residual;
};

/// A cosh(x)/cosh(L) with A = mu/tanh(L) - 1: the positive steady profile of
/// the v-equation on (0, L) when A > 0.
template <typename Scalar>
Field<Scalar> theta_mu_closed_form(const Grid1D<Scalar>& grid, Scalar mu) {
    using std::cosh;
    using std::tanh;
    const Scalar L = grid.length();
    const Scalar amplitude = mu / tanh(L) - 1;
    return Field<Scalar>::from_function(grid, [&](Scalar x) { return amplitude * cosh(x) / cosh(L); });
}

enum class ThetaStart { closed_form, constant };

namespace detail {

// Control-volume residual of the stationary v-row  -v'' + (1 + c u) v  with
// v' = 0 at Gamma1 and v' = mu v/(1+v) at Gamma2.
template <typename Scalar>
Scalar v_row_residual(const Field<Scalar>& u, const Field<Scalar>& v, Scalar mu, Scalar c) {
    const Vector<Scalar> a = (1 + c * u.values().array()).matrix();
    const Vector<Scalar> zero = Vector<Scalar>::Zero(v.size());
    auto g = [mu](Scalar w) { return mu * w / (1 + w); };
    return flux_residual(v.grid(), a, g, zero, v.values()).cwiseAbs().maxCoeff();
}

// Control-volume residual of the stationary u-row  -u'' + (u - lambda) u  with
// zero Neumann data. The chemotactic term is omitted: it vanishes identically
// on the states built here (either u = 0, so V(u) = 0, or v = 0).
template <typename Scalar>
Scalar u_row_residual(const Field<Scalar>& u, Scalar lambda) {
    const Vector<Scalar> a = (u.values().array() - lambda).matrix();
    const Vector<Scalar> zero = Vector<Scalar>::Zero(u.size());
    auto g = [](Scalar) { return Scalar(0); };
    return flux_residual(u.grid(), a, g, zero, u.values()).cwiseAbs().maxCoeff();
}

}  // namespace detail

/// Positive solution of -theta'' + theta = 0, theta' = 0 at Gamma1,
/// theta' = mu theta/(1+theta) at Gamma2. Exists only for mu > mu1; pass a
/// precomputed mu1 to skip the threshold search.
template <typename Scalar>
Field<Scalar> theta_mu(const Grid1D<Scalar>& grid, Scalar mu, std::type_identity_t<std::optional<Scalar>> mu1 = std::nullopt,
                       ThetaStart start = ThetaStart::closed_form, const NewtonOptions& opts = {}) {
    using std::max;
    using std::tanh;
    const Scalar threshold = mu1 ? *mu1 : compute_mu1(grid);
    if (!(mu > threshold))
        throw BelowThresholdError("no positive steady state for mu = " + std::to_string(double(mu)) +
                                  " <= mu1 = " + std::to_string(double(threshold)));

    const Field<Scalar> w0 = start == ThetaStart::closed_form
                                 ? theta_mu_closed_form(grid, mu)
                                 : Field<Scalar>::constant(grid, max(mu / tanh(grid.length()) - 1, Scalar(0.1)));
    auto g = [mu](Scalar w) { return mu * w / (1 + w); };
    auto dg = [mu](Scalar w) { return mu / ((1 + w) * (1 + w)); };
    auto result = solve_nonlinear_bvp<Scalar>(grid, Field<Scalar>::constant(grid, 1), g, dg,
                                              Field<Scalar>::constant(grid, 0), w0, opts);
    if (!(result.solution.values().minCoeff() > 0))
        throw NonconvergenceError("Newton converged to a non-positive branch", result.residual_history.back());
    return result.solution;
}

/// (lambda, 0), or the trivial state when lambda = 0.
template <typename Scalar>
SteadyState<Scalar> semi_trivial_u(const Grid1D<Scalar>& grid, Scalar lambda) {
    if (!(lambda >= 0)) throw DomainConfigError("lambda must be nonnegative");
    auto u = Field<Scalar>::constant(grid, lambda);
    auto v = Field<Scalar>::constant(grid, 0);
    const Scalar res = std::max(detail::u_row_residual(u, lambda), detail::v_row_residual(u, v, Scalar(0), Scalar(1)));
    return {u, v, lambda == 0 ? SteadyKind::trivial : SteadyKind::u_dominant, res};
}

/// (0, theta_mu) with its stationary residual.
template <typename Scalar>
SteadyState<Scalar> semi_trivial_v(const Grid1D<Scalar>& grid, Scalar mu, std::type_identity_t<std::optional<Scalar>> mu1 = std::nullopt) {
    auto v = theta_mu(grid, mu, mu1);
    auto u = Field<Scalar>::constant(grid, 0);
    const Scalar res = std::max(detail::u_row_residual(u, Scalar(0)), detail::v_row_residual(u, v, mu, Scalar(1)));
    return {u, v, SteadyKind::v_dominant, res};
}

}  // namespace angio
