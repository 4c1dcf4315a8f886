#include "pebill/pecore.hpp"

#include <cmath>
#include <string>

namespace pebill {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::ZeroVector: return "ZeroVector";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::PoleParameter: return "PoleParameter";
        case ErrorKind::RootIsolationFailure: return "RootIsolationFailure";
        case ErrorKind::NotInward: return "NotInward";
        case ErrorKind::OffBoundary: return "OffBoundary";
        case ErrorKind::NullNormal: return "NullNormal";
        case ErrorKind::ResonantAxes: return "ResonantAxes";
        case ErrorKind::ExhaustedRejection: return "ExhaustedRejection";
        case ErrorKind::DegenerateChord: return "DegenerateChord";
        case ErrorKind::ZeroSlope: return "ZeroSlope";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::ConvexityViolation: return "ConvexityViolation";
        case ErrorKind::InfeasibleSlopes: return "InfeasibleSlopes";
        case ErrorKind::TangencyCountChanged: return "TangencyCountChanged";
    }
    return "Unknown";
}

std::string_view to_string(LineType type) {
    switch (type) {
        case LineType::Spacelike: return "spacelike";
        case LineType::Timelike: return "timelike";
        case LineType::Lightlike: return "lightlike";
    }
    return "unknown";
}

void require_same_dim(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw Error(ErrorKind::DimensionMismatch,
                    std::string(what) + ": " + std::to_string(a) + " vs " + std::to_string(b));
    }
}

Signature::Signature(int p, int q) : p_(p), q_(q) {
    if (p < 0 || q < 0 || p + q < 2) {
        throw Error(ErrorKind::InvalidArgument,
                    "signature needs p, q >= 0 and p + q >= 2, got (" + std::to_string(p) + ", " +
                        std::to_string(q) + ")");
    }
}

Vec Signature::signs() const {
    Vec s(dim());
    for (std::size_t i = 0; i < dim(); ++i) s[static_cast<Eigen::Index>(i)] = e(i);
    return s;
}

Ellipsoid::Ellipsoid(Vec semi_axes) : a_(std::move(semi_axes)) {
    if (a_.size() < 2) throw Error(ErrorKind::InvalidArgument, "ellipsoid needs at least 2 axes");
    for (Eigen::Index i = 0; i < a_.size(); ++i) {
        if (!(a_[i] > 0.0) || !std::isfinite(a_[i])) {
            throw Error(ErrorKind::InvalidArgument, "semi-axes must be finite and positive");
        }
    }
    a_inv2_ = a_.array().square().inverse().matrix();
}

Vec Ellipsoid::apply(const Vec& x) const {
    require_same_dim(static_cast<std::size_t>(x.size()), dim(), "Ellipsoid::apply");
    return a_inv2_.cwiseProduct(x);
}

double Ellipsoid::form(const Vec& x, const Vec& y) const {
    require_same_dim(static_cast<std::size_t>(x.size()), dim(), "Ellipsoid::form");
    require_same_dim(static_cast<std::size_t>(y.size()), dim(), "Ellipsoid::form");
    return accurate_dot(apply(x), y);
}

double Ellipsoid::max_axis_sq() const { return a_.array().square().maxCoeff(); }

double accurate_dot(const Vec& u, const Vec& v, const Vec& w) {
    require_same_dim(static_cast<std::size_t>(u.size()), static_cast<std::size_t>(v.size()), "accurate_dot");
    if (w.size() != 0) {
        require_same_dim(static_cast<std::size_t>(u.size()), static_cast<std::size_t>(w.size()), "accurate_dot");
    }
    // Ogita-Rump-Oishi Dot2 on the products (w_i u_i) v_i; weights are
    // applied exactly when they are +-1.
    double sum = 0.0;
    double comp = 0.0;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        const double a = w.size() != 0 ? w[i] * u[i] : u[i];
        const double prod = a * v[i];
        const double prod_err = std::fma(a, v[i], -prod);
        const double t = sum + prod;
        const double z = t - sum;
        const double sum_err = (sum - (t - z)) + (prod - z);
        sum = t;
        comp += prod_err + sum_err;
    }
    return sum + comp;
}

double inner(const Vec& u, const Vec& v, const Signature& sig) {
    require_same_dim(static_cast<std::size_t>(u.size()), sig.dim(), "inner");
    require_same_dim(static_cast<std::size_t>(v.size()), sig.dim(), "inner");
    return accurate_dot(u, v, sig.signs());
}

LineType classify_vector(const Vec& v, const Signature& sig, double tol) {
    const double norm2 = v.squaredNorm();
    if (norm2 == 0.0) throw Error(ErrorKind::ZeroVector, "cannot classify the zero vector");
    const double q = inner(v, v, sig);
    if (std::abs(q) <= tol * norm2) return LineType::Lightlike;
    return q > 0.0 ? LineType::Spacelike : LineType::Timelike;
}

RayState line_canonicalize(const RayState& r) {
    require_same_dim(static_cast<std::size_t>(r.x.size()), static_cast<std::size_t>(r.v.size()),
                     "line_canonicalize");
    const double norm = r.v.norm();
    if (norm == 0.0) throw Error(ErrorKind::ZeroVector, "line direction is zero");
    Vec dir = r.v / norm;
    Vec foot = r.x - r.x.dot(dir) * dir;
    // second pass removes the residual component along dir left by cancellation
    foot -= foot.dot(dir) * dir;
    return {std::move(foot), std::move(dir)};
}

double quadric_eval(const Quadric& quad, const Vec& x) {
    require_same_dim(static_cast<std::size_t>(quad.c.size()), static_cast<std::size_t>(x.size()),
                     "quadric_eval");
    return (x.array().square() / quad.c.array()).sum() - 1.0;
}

}  // namespace pebill
