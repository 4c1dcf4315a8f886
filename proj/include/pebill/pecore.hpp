#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <string_view>

#include "pebill/error.hpp"

namespace pebill {

using Vec = Eigen::VectorXd;

/// Explicit numerical tolerances. Every default is listed here and nowhere else.
struct Tolerances {
    double boundary = 1e-10;       // |Ax.x - 1| accepted as "on the ellipsoid"
    double lightlike = 1e-10;      // relative: |<v,v>| <= tol * |v|^2
    double null_normal = 1e-10;    // relative: |<n,n>| <= tol * |n|^2 refuses reflection
    double grazing = 1e-12;        // relative: |Ax.v| < tol * |x| |v| refuses a chord
};

/// Diagonal signature (p, q): e_1..e_p = +1, e_{p+1}..e_{p+q} = -1.
class Signature {
public:
    Signature(int p, int q);

    int p() const noexcept { return p_; }
    int q() const noexcept { return q_; }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(p_ + q_); }
    double e(std::size_t i) const noexcept { return i < static_cast<std::size_t>(p_) ? 1.0 : -1.0; }
    /// The sign vector (e_i) as a dense vector.
    Vec signs() const;
    bool is_euclidean() const noexcept { return q_ == 0; }

    friend bool operator==(const Signature&, const Signature&) = default;

private:
    int p_;
    int q_;
};

/// Ellipsoid Ax.x = 1 with A = diag(a_i^-2).
class Ellipsoid {
public:
    explicit Ellipsoid(Vec semi_axes);

    const Vec& axes() const noexcept { return a_; }
    const Vec& operator_diag() const noexcept { return a_inv2_; }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(a_.size()); }

    /// Componentwise A x.
    Vec apply(const Vec& x) const;
    /// A x . y
    double form(const Vec& x, const Vec& y) const;
    /// A x . x - 1
    double level(const Vec& x) const { return form(x, x) - 1.0; }
    double max_axis_sq() const;

private:
    Vec a_;
    Vec a_inv2_;
};

/// A point and a direction; stands for the oriented line x + t v together with
/// the scale of v.
struct RayState {
    Vec x;
    Vec v;
};

/// Central quadric sum x_i^2 / c_i = 1. Coefficients may have either sign.
struct Quadric {
    Vec c;
};

enum class LineType { Spacelike, Timelike, Lightlike };

std::string_view to_string(LineType type);

double inner(const Vec& u, const Vec& v, const Signature& sig);
/// sum_i w_i u_i v_i evaluated in twice the working precision (error-free
/// products and sums), then rounded once. w may be empty for unit weights.
double accurate_dot(const Vec& u, const Vec& v, const Vec& w = Vec());
LineType classify_vector(const Vec& v, const Signature& sig, double tol = Tolerances{}.lightlike);
/// Foot of the perpendicular from the origin, unit direction; orientation kept.
RayState line_canonicalize(const RayState& r);
double quadric_eval(const Quadric& quad, const Vec& x);

void require_same_dim(std::size_t a, std::size_t b, const char* what);

}  // namespace pebill
