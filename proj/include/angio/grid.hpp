#pragma once

#include <Eigen/Core>

#include <cmath>
#include <functional>
#include <string>

#include "angio/errors.hpp"

namespace angio {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Uniform grid on the interval (0, L). Node 0 is the vessel boundary (Gamma1),
/// node n-1 the tumor boundary (Gamma2).
template <typename Scalar>
class Grid1D {
public:
    Grid1D(Scalar length, Eigen::Index n) : length_(length), n_(n) {
        if (!(length > Scalar(0)) || !std::isfinite(static_cast<double>(length)))
            throw DomainConfigError("grid length must be positive and finite");
        if (n < 3) throw DomainConfigError("grid requires at least 3 nodes, got " + std::to_string(n));
    }

    Scalar length() const noexcept { return length_; }
    Eigen::Index size() const noexcept { return n_; }
    Scalar spacing() const noexcept { return length_ / Scalar(n_ - 1); }
    Scalar node(Eigen::Index i) const noexcept {
        return i == n_ - 1 ? length_ : Scalar(i) * spacing();
    }
    Vector<Scalar> nodes() const {
        Vector<Scalar> x(n_);
        for (Eigen::Index i = 0; i < n_; ++i) x[i] = node(i);
        return x;
    }

    static constexpr Eigen::Index gamma1_index() noexcept { return 0; }
    Eigen::Index gamma2_index() const noexcept { return n_ - 1; }

    friend bool operator==(const Grid1D& a, const Grid1D& b) noexcept {
        return a.length_ == b.length_ && a.n_ == b.n_;
    }

private:
    Scalar length_;
    Eigen::Index n_;
};

template <typename Scalar = double>
Grid1D<Scalar> make_grid(Scalar length, Eigen::Index n) {
    return Grid1D<Scalar>(length, n);
}

/// Nodal values on a grid; immutable once built.
template <typename Scalar>
class Field {
public:
    Field(const Grid1D<Scalar>& grid, Vector<Scalar> values)
        : grid_(grid), values_(std::move(values)) {
        if (values_.size() != grid_.size())
            throw DomainConfigError("field size does not match grid node count");
        if (!values_.allFinite()) throw DomainConfigError("field contains non-finite values");
    }

    static Field constant(const Grid1D<Scalar>& grid, Scalar c) {
        return Field(grid, Vector<Scalar>::Constant(grid.size(), c));
    }

    template <typename Fn>
    static Field from_function(const Grid1D<Scalar>& grid, Fn&& fn) {
        Vector<Scalar> v(grid.size());
        for (Eigen::Index i = 0; i < grid.size(); ++i) v[i] = fn(grid.node(i));
        return Field(grid, std::move(v));
    }

    const Grid1D<Scalar>& grid() const noexcept { return grid_; }
    const Vector<Scalar>& values() const noexcept { return values_; }
    Eigen::Index size() const noexcept { return values_.size(); }
    Scalar operator[](Eigen::Index i) const { return values_[i]; }
    Scalar at_gamma1() const { return values_[grid_.gamma1_index()]; }
    Scalar at_gamma2() const { return values_[grid_.gamma2_index()]; }

private:
    Grid1D<Scalar> grid_;
    Vector<Scalar> values_;
};

namespace detail {
template <typename Scalar>
void require_same_grid(const Field<Scalar>& a, const Field<Scalar>& b) {
    if (!(a.grid() == b.grid())) throw DomainConfigError("fields live on different grids");
}
}  // namespace detail

template <typename Scalar>
Field<Scalar> operator+(const Field<Scalar>& a, const Field<Scalar>& b) {
    detail::require_same_grid(a, b);
    return Field<Scalar>(a.grid(), a.values() + b.values());
}

template <typename Scalar>
Field<Scalar> operator-(const Field<Scalar>& a, const Field<Scalar>& b) {
    detail::require_same_grid(a, b);
    return Field<Scalar>(a.grid(), a.values() - b.values());
}

template <typename Scalar>
Field<Scalar> operator*(Scalar s, const Field<Scalar>& a) {
    return Field<Scalar>(a.grid(), s * a.values());
}

/// Composite trapezoid weights: h in the interior, h/2 at the two endpoints.
template <typename Scalar>
Vector<Scalar> trapezoid_weights(const Grid1D<Scalar>& grid) {
    Vector<Scalar> w = Vector<Scalar>::Constant(grid.size(), grid.spacing());
    w[0] *= Scalar(0.5);
    w[grid.size() - 1] *= Scalar(0.5);
    return w;
}

/// Trapezoid rule applied to any nodal expression.
template <typename Scalar, typename Derived>
Scalar integrate(const Grid1D<Scalar>& grid, const Eigen::DenseBase<Derived>& nodal) {
    const Eigen::Index n = grid.size();
    const Scalar inner = nodal.derived().segment(1, n - 2).sum();
    return grid.spacing() * (inner + Scalar(0.5) * (nodal.derived()[0] + nodal.derived()[n - 1]));
}

template <typename Scalar>
Scalar integrate(const Field<Scalar>& f) {
    return integrate(f.grid(), f.values());
}

enum class NormKind { L2, Linf };

template <typename Scalar, typename Derived>
Scalar norm(const Grid1D<Scalar>& grid, const Eigen::DenseBase<Derived>& nodal, NormKind kind) {
    if (kind == NormKind::Linf) return nodal.derived().cwiseAbs().maxCoeff();
    using std::sqrt;
    return sqrt(integrate(grid, nodal.derived().array().square()));
}

template <typename Scalar>
Scalar norm(const Field<Scalar>& f, NormKind kind) {
    return norm(f.grid(), f.values(), kind);
}

using Grid = Grid1D<double>;
using FieldD = Field<double>;

}  // namespace angio
