#pragma once

#include <Eigen/Core>

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <variant>
#include <vector>

#include "angio/errors.hpp"
#include "angio/grid.hpp"

namespace angio {

// Boundary data on Gamma2. Gamma1 is always zero Neumann.
//
// Conventions, with n the outward normal:
//   LinearRobin{b}    dw/dn + b w = 0     (the N+b form of the eigenvalue problem)
//   NonlinearFlux{g}  dw/dn = g(w)        (outward-flux form of the v-equation)
// Both are the same thing for g(w) = -b w. The flux mu*v/(1+v) is NonlinearFlux,
// and the decay exponent alpha(mu) uses LinearRobin{-mu}.

struct ZeroNeumann {};

template <typename Scalar>
struct LinearRobin {
    Scalar b;
};

template <typename Scalar>
struct NonlinearFlux {
    std::function<Scalar(Scalar)> g;
    std::function<Scalar(Scalar)> dg;
};

template <typename Scalar>
struct BoundarySpec {
    std::variant<ZeroNeumann, LinearRobin<Scalar>, NonlinearFlux<Scalar>> gamma2 = ZeroNeumann{};

    static BoundarySpec neumann() { return {}; }
    static BoundarySpec robin(Scalar b) { return {LinearRobin<Scalar>{b}}; }
    /// dw/dn = slope * w at Gamma2.
    static BoundarySpec flux_slope(Scalar slope) { return robin(-slope); }
    static BoundarySpec nonlinear(std::function<Scalar(Scalar)> g, std::function<Scalar(Scalar)> dg) {
        return {NonlinearFlux<Scalar>{std::move(g), std::move(dg)}};
    }
};

/// Tridiagonal discretization of -w'' + a(x) w with ghost-node boundary rows.
/// Row i holds lower[i] * w[i-1] + diag[i] * w[i] + upper[i] * w[i+1];
/// lower[0] and upper[n-1] are unused and kept at zero.
///
/// The operator is symmetric in the trapezoid-weighted inner product: the two
/// boundary rows carry the factor 2 of the mirror-node elimination.
template <typename Scalar>
struct BandedOperator {
    Grid1D<Scalar> grid;
    Vector<Scalar> lower;
    Vector<Scalar> diag;
    Vector<Scalar> upper;

    Eigen::Index size() const noexcept { return diag.size(); }

    Vector<Scalar> apply(const Vector<Scalar>& w) const {
        const Eigen::Index n = size();
        Vector<Scalar> out(n);
        out[0] = diag[0] * w[0] + upper[0] * w[1];
        for (Eigen::Index i = 1; i < n - 1; ++i)
            out[i] = lower[i] * w[i - 1] + diag[i] * w[i] + upper[i] * w[i + 1];
        out[n - 1] = lower[n - 1] * w[n - 2] + diag[n - 1] * w[n - 1];
        return out;
    }

    Field<Scalar> apply(const Field<Scalar>& w) const { return Field<Scalar>(grid, apply(w.values())); }

    /// Returns op - sigma * I.
    BandedOperator shifted(Scalar sigma) const {
        BandedOperator out = *this;
        out.diag.array() -= sigma;
        return out;
    }
};

/// Assemble -Laplacian + a with Neumann at Gamma1 and `bc` at Gamma2.
/// A NonlinearFlux boundary is linearized Newton-style about `about`, which
/// must then be supplied.
template <typename Scalar>
BandedOperator<Scalar> assemble(const Grid1D<Scalar>& grid, const Field<Scalar>& a,
                                const BoundarySpec<Scalar>& bc,
                                const Vector<Scalar>* about = nullptr) {
    if (!(a.grid() == grid)) throw DomainConfigError("potential lives on a different grid");
    const Eigen::Index n = grid.size();
    const Scalar h = grid.spacing();
    const Scalar inv_h2 = Scalar(1) / (h * h);

    BandedOperator<Scalar> op{grid, Vector<Scalar>::Constant(n, -inv_h2),
                              Vector<Scalar>::Constant(n, 2 * inv_h2) + a.values(),
                              Vector<Scalar>::Constant(n, -inv_h2)};
    op.lower[0] = 0;
    op.upper[n - 1] = 0;
    // mirror node w[-1] = w[1]
    op.upper[0] = -2 * inv_h2;
    // ghost node w[n] = w[n-2] + 2h * dw/dn
    op.lower[n - 1] = -2 * inv_h2;

    std::visit(
        [&](const auto& side) {
            using T = std::decay_t<decltype(side)>;
            if constexpr (std::is_same_v<T, LinearRobin<Scalar>>) {
                op.diag[n - 1] += 2 * side.b / h;
            } else if constexpr (std::is_same_v<T, NonlinearFlux<Scalar>>) {
                if (about == nullptr)
                    throw DomainConfigError("nonlinear flux needs a linearization point");
                op.diag[n - 1] -= 2 * side.dg((*about)[n - 1]) / h;
            }
        },
        bc.gamma2);
    return op;
}

/// Adds the ghost-node contribution of an inhomogeneous flux dw/dn = flux at
/// Gamma2 to a right-hand side.
template <typename Scalar>
void add_gamma2_flux(const Grid1D<Scalar>& grid, Vector<Scalar>& rhs, Scalar flux) {
    rhs[grid.size() - 1] += 2 * flux / grid.spacing();
}

/// Thomas elimination. Throws SpectralShiftError on a vanishing pivot.
template <typename Scalar>
Vector<Scalar> solve_linear(const BandedOperator<Scalar>& op, const Vector<Scalar>& rhs) {
    using std::abs;
    const Eigen::Index n = op.size();
    if (rhs.size() != n) throw DomainConfigError("right-hand side size mismatch");
    const Scalar eps = std::numeric_limits<Scalar>::epsilon();

    Vector<Scalar> c(n), d(n);
    auto check = [&](Scalar pivot, Eigen::Index i) {
        const Scalar scale = abs(op.lower[i]) + abs(op.diag[i]) + abs(op.upper[i]);
        if (!(abs(pivot) > 64 * eps * scale))
            throw SpectralShiftError("singular pivot at row " + std::to_string(i));
    };

    Scalar pivot = op.diag[0];
    check(pivot, 0);
    c[0] = op.upper[0] / pivot;
    d[0] = rhs[0] / pivot;
    for (Eigen::Index i = 1; i < n; ++i) {
        pivot = op.diag[i] - op.lower[i] * c[i - 1];
        check(pivot, i);
        c[i] = op.upper[i] / pivot;
        d[i] = (rhs[i] - op.lower[i] * d[i - 1]) / pivot;
    }
    Vector<Scalar> w(n);
    w[n - 1] = d[n - 1];
    for (Eigen::Index i = n - 2; i >= 0; --i) w[i] = d[i] - c[i] * w[i + 1];
    return w;
}

template <typename Scalar>
Field<Scalar> solve_linear(const BandedOperator<Scalar>& op, const Field<Scalar>& rhs) {
    return Field<Scalar>(op.grid, solve_linear(op, rhs.values()));
}

struct NewtonOptions {
    double tolerance = 1e-10;
    int max_iterations = 50;
    int max_halvings = 8;
};

template <typename Scalar>
struct NewtonResult {
    Field<Scalar> solution;
    /// Residual infinity-norm of every iterate, starting with w0.
    std::vector<Scalar> residual_history;
    int iterations = 0;
};

namespace detail {

// Control-volume form of the residual: row i of -w'' + a w - s with the
// Gamma2 flux eliminated, multiplied by the trapezoid weight of node i.
template <typename Scalar, typename Flux>
Vector<Scalar> flux_residual(const Grid1D<Scalar>& grid, const Vector<Scalar>& a,
                             const Flux& g, const Vector<Scalar>& source, const Vector<Scalar>& w) {
    const Eigen::Index n = grid.size();
    const Scalar h = grid.spacing();
    Vector<Scalar> r(n);
    // differences first: the subtraction of neighbours is exact for smooth w
    r[0] = (w[0] - w[1]) / h + Scalar(0.5) * h * (a[0] * w[0] - source[0]);
    for (Eigen::Index i = 1; i < n - 1; ++i)
        r[i] = ((w[i] - w[i - 1]) - (w[i + 1] - w[i])) / h + h * (a[i] * w[i] - source[i]);
    r[n - 1] = (w[n - 1] - w[n - 2]) / h - g(w[n - 1]) +
               Scalar(0.5) * h * (a[n - 1] * w[n - 1] - source[n - 1]);
    return r;
}

}  // namespace detail

/// Damped Newton iteration for -w'' + a w = source on (0, L), w' = 0 at Gamma1,
/// w' = g(w) at Gamma2. The residual is measured in control-volume form
/// (each nodal equation times its trapezoid weight).
template <typename Scalar>
NewtonResult<Scalar> solve_nonlinear_bvp(const Grid1D<Scalar>& grid, const Field<Scalar>& a,
                                         const std::function<Scalar(Scalar)>& g,
                                         const std::function<Scalar(Scalar)>& dg,
                                         const Field<Scalar>& source, const Field<Scalar>& w0,
                                         const NewtonOptions& opts = {}) {
    const Vector<Scalar> weights = trapezoid_weights(grid);
    const BoundarySpec<Scalar> bc = BoundarySpec<Scalar>::nonlinear(g, dg);

    auto residual = [&](const Vector<Scalar>& w) {
        return detail::flux_residual(grid, a.values(), g, source.values(), w);
    };
    auto inf_norm = [](const Vector<Scalar>& r) {
        // NaN must compare as "not smaller", hence the explicit guard
        return r.allFinite() ? r.cwiseAbs().maxCoeff() : std::numeric_limits<Scalar>::infinity();
    };

    Vector<Scalar> w = w0.values();
    Vector<Scalar> r = residual(w);
    Scalar rnorm = inf_norm(r);
    NewtonResult<Scalar> out{w0, {rnorm}, 0};

    for (int it = 0; it < opts.max_iterations && !(rnorm <= Scalar(opts.tolerance)); ++it) {
        BandedOperator<Scalar> jac = assemble(grid, a, bc, &w);
        // scale rows to match the control-volume residual
        jac.lower.array() *= weights.array();
        jac.diag.array() *= weights.array();
        jac.upper.array() *= weights.array();

        Vector<Scalar> step;
        try {
            step = solve_linear(jac, Vector<Scalar>(-r));
        } catch (const SpectralShiftError& e) {
            throw SingularJacobianError(std::string("Newton Jacobian is singular: ") + e.what());
        }

        Scalar damping = 1;
        Vector<Scalar> trial = w + step;
        Vector<Scalar> trial_r = residual(trial);
        Scalar trial_norm = inf_norm(trial_r);
        for (int k = 0; k < opts.max_halvings && !(trial_norm < rnorm); ++k) {
            damping /= 2;
            trial = w + damping * step;
            trial_r = residual(trial);
            trial_norm = inf_norm(trial_r);
        }
        if (!std::isfinite(static_cast<double>(trial_norm)))
            throw NonconvergenceError("Newton step produced a non-finite residual",
                                      static_cast<double>(rnorm));
        w = std::move(trial);
        r = std::move(trial_r);
        rnorm = trial_norm;
        out.residual_history.push_back(rnorm);
        out.iterations = it + 1;
    }
    if (!(rnorm <= Scalar(opts.tolerance)))
        throw NonconvergenceError("Newton iteration did not converge in " +
                                      std::to_string(opts.max_iterations) + " steps",
                                  static_cast<double>(rnorm));
    out.solution = Field<Scalar>(grid, std::move(w));
    return out;
}

}  // namespace angio
