#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <type_traits>

#include "angio/elliptic.hpp"
#include "angio/errors.hpp"
#include "angio/grid.hpp"

namespace angio {

template <typename Scalar>
struct EigenResult {
    Scalar eigenvalue;
    /// Positive, normalized to unit maximum.
    Field<Scalar> eigenfunction;
    /// || op phi - eigenvalue phi ||_inf
    Scalar residual;
    int iterations;
    Scalar shift;
};

struct EigenOptions {
    double rayleigh_tolerance = 1e-11;
    double residual_tolerance = 1e-8;
    int max_iterations = 10000;
    int max_shift_retries = 5;
};

namespace detail {

// Pointwise residual of op w - lambda w, with the second differences formed
// from neighbour differences so that cancellation stays at the level of w.
template <typename Scalar>
Scalar eigen_residual(const BandedOperator<Scalar>& op, const Vector<Scalar>& a, const Vector<Scalar>& w,
                      Scalar lambda) {
    const Eigen::Index n = op.size();
    const Scalar h = op.grid.spacing();
    const Scalar inv_h2 = Scalar(1) / (h * h);
    // Gamma2 boundary term, whatever the Robin coefficient is
    const Scalar robin = op.diag[n - 1] - 2 * inv_h2 - a[n - 1];
    using std::abs;
    Scalar res = abs(2 * (w[0] - w[1]) * inv_h2 + (a[0] - lambda) * w[0]);
    for (Eigen::Index i = 1; i < n - 1; ++i)
        res = std::max(res, abs(((w[i] - w[i - 1]) - (w[i + 1] - w[i])) * inv_h2 + (a[i] - lambda) * w[i]));
    res = std::max(res, abs(2 * (w[n - 1] - w[n - 2]) * inv_h2 + (robin + a[n - 1] - lambda) * w[n - 1]));
    return res;
}

// Upper bound for k^2 where k tanh(kL) = slope; uses tanh(y) >= y / (1 + y).
template <typename Scalar>
Scalar robin_eigen_bound(Scalar slope, Scalar length) {
    if (!(slope > 0)) return 0;
    using std::sqrt;
    const Scalar k = (slope * length + sqrt(slope * slope * length * length + 4 * slope * length)) / (2 * length);
    return k * k;
}

}  // namespace detail

/// Principal eigenpair of -w'' + a w = lambda w, w' = 0 at Gamma1,
/// w' = robin_mu * w at Gamma2, by shifted inverse iteration.
template <typename Scalar>
EigenResult<Scalar> principal_eigen(const Grid1D<Scalar>& grid, const Field<Scalar>& a, Scalar robin_mu,
                                    const std::type_identity_t<std::optional<Field<Scalar>>>& initial = std::nullopt,
                                    const EigenOptions& opts = {}) {
    using std::abs;
    const BandedOperator<Scalar> op = assemble(grid, a, BoundarySpec<Scalar>::flux_slope(robin_mu));
    const Vector<Scalar> weights = trapezoid_weights(grid);

    // The continuous Robin bound keeps the shift below lambda_1 even when the
    // boundary term is destabilizing (robin_mu > 0).
    Scalar shift = std::min(Scalar(0), a.values().minCoeff()) - 1 -
                   detail::robin_eigen_bound(robin_mu, grid.length());

    Vector<Scalar> start = initial ? initial->values() : Vector<Scalar>::Ones(grid.size());
    if (!(start.cwiseAbs().maxCoeff() > 0)) throw DomainConfigError("initial iterate is zero");
    start /= start.cwiseAbs().maxCoeff();

    for (int attempt = 0;; ++attempt) {
        try {
            const BandedOperator<Scalar> shifted = op.shifted(shift);
            Vector<Scalar> x = start;
            Scalar rq_prev = std::numeric_limits<Scalar>::infinity();
            Scalar residual = std::numeric_limits<Scalar>::infinity();
            for (int it = 1; it <= opts.max_iterations; ++it) {
                Vector<Scalar> y = solve_linear(shifted, x);
                Eigen::Index imax;
                y.cwiseAbs().maxCoeff(&imax);
                y /= y[imax];

                const Vector<Scalar> ay = op.apply(y);
                const Scalar rq = (weights.array() * y.array() * ay.array()).sum() /
                                  (weights.array() * y.array().square()).sum();
                residual = detail::eigen_residual(op, a.values(), y, rq);
                const bool settled = abs(rq - rq_prev) < Scalar(opts.rayleigh_tolerance);
                rq_prev = rq;
                x = std::move(y);
                if (settled && residual <= Scalar(opts.residual_tolerance)) {
                    if (x.minCoeff() < Scalar(-1e-12))
                        throw PositivityViolation("principal eigenfunction has a negative entry");
                    return {rq, Field<Scalar>(grid, std::move(x)), residual, it, shift};
                }
            }
            throw NonconvergenceError("inverse iteration cap exceeded", static_cast<double>(residual));
        } catch (const SpectralShiftError&) {
            if (attempt >= opts.max_shift_retries) throw;
            shift -= 1;
        }
    }
}

/// Principal eigenvalue of -Laplacian + 1 with w' = mu w on Gamma2.
template <typename Scalar>
Scalar alpha_of_mu(const Grid1D<Scalar>& grid, Scalar mu) {
    return principal_eigen(grid, Field<Scalar>::constant(grid, Scalar(1)), mu).eigenvalue;
}

/// Threshold flux strength: the root of alpha_of_mu, which decreases strictly
/// in mu. Bracketed by doubling from [0, 1], refined by bisection to `tolerance`,
/// then one linear interpolation across the final bracket.
template <typename Scalar>
Scalar compute_mu1(const Grid1D<Scalar>& grid, Scalar tolerance = Scalar(1e-8)) {
    Scalar lo = 0, hi = 1;
    Scalar alpha_lo = alpha_of_mu(grid, lo);
    Scalar alpha_hi = alpha_of_mu(grid, hi);
    if (!(alpha_lo > 0)) throw ThresholdSearchError("alpha(0) is not positive");
    while (alpha_hi > 0) {
        lo = hi;
        alpha_lo = alpha_hi;
        hi *= 2;
        if (hi > Scalar(64)) throw ThresholdSearchError("no sign change of alpha(mu) below mu = 64");
        alpha_hi = alpha_of_mu(grid, hi);
    }
    while (hi - lo > tolerance) {
        const Scalar mid = (lo + hi) / 2;
        const Scalar alpha_mid = alpha_of_mu(grid, mid);
        if (alpha_mid > 0) {
            lo = mid;
            alpha_lo = alpha_mid;
        } else {
            hi = mid;
            alpha_hi = alpha_mid;
        }
    }
    if (alpha_lo == alpha_hi) return (lo + hi) / 2;
    return lo + alpha_lo * (hi - lo) / (alpha_lo - alpha_hi);
}

}  // namespace angio
