#include "pebill/confocal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/toms748_solve.hpp>

namespace pebill {

ConfocalFamily::ConfocalFamily(Ellipsoid ell, Signature sig) : ell_(std::move(ell)), sig_(sig) {
    require_same_dim(ell_.dim(), sig_.dim(), "ConfocalFamily");
    for (std::size_t i = 0; i < dim(); ++i) {
        const double a = ell_.axes()[static_cast<Eigen::Index>(i)];
        poles_.push_back(-sig_.e(i) * a * a);
    }
    std::sort(poles_.begin(), poles_.end());
    pole_tol_ = 1e-7 * ell_.max_axis_sq();
    poles_.erase(std::unique(poles_.begin(), poles_.end(),
                             [this](double l, double r) { return r - l <= pole_tol_; }),
                 poles_.end());
}

double ConfocalFamily::coefficient(std::size_t i, double lambda) const {
    const double a = ell_.axes()[static_cast<Eigen::Index>(i)];
    return a * a + sig_.e(i) * lambda;
}

bool ConfocalFamily::near_pole(double lambda) const {
    return std::any_of(poles_.begin(), poles_.end(),
                       [&](double p) { return std::abs(lambda - p) <= pole_tol_; });
}

std::vector<double> TangencySet::lambdas() const {
    std::vector<double> out;
    out.reserve(params.size());
    for (const auto& p : params) out.push_back(p.lambda);
    return out;
}

bool TangencySet::has_double_root() const {
    return std::any_of(params.begin(), params.end(), [](const auto& p) { return p.double_root; });
}

Quadric member(const ConfocalFamily& fam, double lambda) {
    if (fam.near_pole(lambda)) {
        throw Error(ErrorKind::PoleParameter, "lambda = " + std::to_string(lambda) + " is a pole");
    }
    Vec c(fam.dim());
    for (std::size_t i = 0; i < fam.dim(); ++i) c[static_cast<Eigen::Index>(i)] = fam.coefficient(i, lambda);
    return {c};
}

double tangency_discriminant(const ConfocalFamily& fam, const RayState& r, double lambda) {
    const Quadric q = member(fam, lambda);
    require_same_dim(static_cast<std::size_t>(r.x.size()), fam.dim(), "tangency_discriminant");
    require_same_dim(static_cast<std::size_t>(r.v.size()), fam.dim(), "tangency_discriminant");
    const auto inv = q.c.array().inverse();
    const double xbv = (inv * r.x.array() * r.v.array()).sum();
    const double vbv = (inv * r.v.array().square()).sum();
    const double xbx = (inv * r.x.array().square()).sum();
    return xbv * xbv - vbv * (xbx - 1.0);
}

double poly_eval(const std::vector<double>& coeffs, double x) {
    double acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
    return acc;
}

namespace {

using Poly = std::vector<double>;

Poly poly_mul(const Poly& a, const Poly& b) {
    Poly out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

void poly_add_scaled(Poly& acc, const Poly& term, double s) {
    if (acc.size() < term.size()) acc.resize(term.size(), 0.0);
    for (std::size_t i = 0; i < term.size(); ++i) acc[i] += s * term[i];
}

struct PluckerTerm {
    std::size_t i;
    std::size_t j;
    double m2;  // (x_i v_j - x_j v_i)^2, unchanged when x slides along v
};

/// Lagrange-identity form of the discriminant:
///   G = sum_i v_i^2 / c_i - sum_{i<j} M_ij^2 / (c_i c_j).
/// Depends on the line only through v and the Plucker coordinates M_ij.
///
/// For |lambda| beyond the largest pole the first sum is rewritten as
///   (<v,v> - sum_i e_i a_i^2 v_i^2 / c_i) / lambda,
/// which avoids the cancellation that leaves only rounding noise in the tails
/// for light-like v. For lines classified light-like <v,v> is taken as 0.
class LineDiscriminant {
public:
    LineDiscriminant(const ConfocalFamily& fam, const RayState& r, bool lightlike)
        : fam_(fam), far_(fam.ellipsoid().max_axis_sq()) {
        const auto n = fam.dim();
        v2_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            v2_[i] = r.v[ii] * r.v[ii];
            for (std::size_t j = i + 1; j < n; ++j) {
                const auto jj = static_cast<Eigen::Index>(j);
                const double m = r.x[ii] * r.v[jj] - r.x[jj] * r.v[ii];
                terms_.push_back({i, j, m * m});
            }
        }
        norm2_ = lightlike ? 0.0 : inner(r.v, r.v, fam.signature());
        c_.resize(n);
    }

    struct Value {
        double g;
        double scale;
    };

    Value operator()(double lambda) const {
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] = fam_.coefficient(i, lambda);
        double g = 0.0;
        double scale = 0.0;
        if (std::abs(lambda) > far_) {
            g = norm2_;
            scale = std::abs(norm2_);
            for (std::size_t i = 0; i < c_.size(); ++i) {
                const double a = fam_.ellipsoid().axes()[static_cast<Eigen::Index>(i)];
                const double t = fam_.signature().e(i) * a * a * v2_[i] / c_[i];
                g -= t;
                scale += std::abs(t);
            }
            g /= lambda;
            scale /= std::abs(lambda);
        } else {
            for (std::size_t i = 0; i < c_.size(); ++i) {
                const double t = v2_[i] / c_[i];
                g += t;
                scale += std::abs(t);
            }
        }
        for (const auto& term : terms_) {
            const double t = term.m2 / (c_[term.i] * c_[term.j]);
            g -= t;
            scale += std::abs(t);
        }
        return {g, scale};
    }

    const std::vector<double>& v2() const { return v2_; }
    const std::vector<PluckerTerm>& terms() const { return terms_; }

private:
    const ConfocalFamily& fam_;
    double far_;
    double norm2_;
    std::vector<double> v2_;
    std::vector<PluckerTerm> terms_;
    mutable std::vector<double> c_;
};

Poly linear_factor(const ConfocalFamily& fam, std::size_t i) {
    const double a = fam.ellipsoid().axes()[static_cast<Eigen::Index>(i)];
    return {a * a, fam.signature().e(i)};
}

Poly product_except(const ConfocalFamily& fam, std::size_t skip1, std::size_t skip2) {
    Poly out{1.0};
    for (std::size_t k = 0; k < fam.dim(); ++k) {
        if (k == skip1 || k == skip2) continue;
        out = poly_mul(out, linear_factor(fam, k));
    }
    return out;
}

struct Interval {
    double lo;
    double hi;
    bool lo_infinite;
    bool hi_infinite;
};

/// Sample parameters for one interval between consecutive poles (or a tail).
/// Points cluster near the poles, where G varies fastest.
std::vector<double> interval_grid(const Interval& iv, int n, double pole_gap, double tail_scale) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n) + 2);
    if (iv.lo_infinite) {
        for (int j = n - 1; j >= 1; --j) {
            const double u = static_cast<double>(j) / n;
            out.push_back(iv.hi - pole_gap - tail_scale * u * u / ((1.0 - u) * (1.0 - u)));
        }
        out.push_back(iv.hi - pole_gap);
        return out;
    }
    if (iv.hi_infinite) {
        out.push_back(iv.lo + pole_gap);
        for (int j = 1; j < n; ++j) {
            const double u = static_cast<double>(j) / n;
            out.push_back(iv.lo + pole_gap + tail_scale * u * u / ((1.0 - u) * (1.0 - u)));
        }
        return out;
    }
    const double lo = iv.lo + pole_gap;
    const double hi = iv.hi - pole_gap;
    if (!(hi > lo)) return out;
    out.push_back(lo);
    for (int j = 1; j < n; ++j) {
        const double u = static_cast<double>(j) / n;
        out.push_back(lo + (hi - lo) * 0.5 * (1.0 - std::cos(std::numbers::pi * u)));
    }
    out.push_back(hi);
    return out;
}

}  // namespace

std::vector<double> cleared_polynomial(const ConfocalFamily& fam, const RayState& r) {
    require_same_dim(static_cast<std::size_t>(r.x.size()), fam.dim(), "cleared_polynomial");
    require_same_dim(static_cast<std::size_t>(r.v.size()), fam.dim(), "cleared_polynomial");
    const LineDiscriminant disc(fam, r, false);
    const std::size_t none = fam.dim();

    // G * prod c_i, a polynomial of degree <= n
    Poly reduced{0.0};
    for (std::size_t i = 0; i < fam.dim(); ++i) {
        poly_add_scaled(reduced, product_except(fam, i, none), disc.v2()[i]);
    }
    for (const auto& term : disc.terms()) {
        poly_add_scaled(reduced, product_except(fam, term.i, term.j), -term.m2);
    }
    return poly_mul(reduced, product_except(fam, none, none));
}

TangencySet tangency_parameters(const ConfocalFamily& fam, const RayState& r,
                                const RootIsolationOptions& opts) {
    require_same_dim(static_cast<std::size_t>(r.x.size()), fam.dim(), "tangency_parameters");
    require_same_dim(static_cast<std::size_t>(r.v.size()), fam.dim(), "tangency_parameters");
    if (r.v.squaredNorm() == 0.0) throw Error(ErrorKind::ZeroVector, "line direction is zero");
    if (opts.grid_per_interval < 4) {
        throw Error(ErrorKind::InvalidArgument, "root isolation grid needs at least 4 samples");
    }

    const bool lightlike = classify_vector(r.v, fam.signature()) == LineType::Lightlike;
    const LineDiscriminant disc(fam, r, lightlike);
    const auto& poles = fam.poles();
    const double pole_tol = fam.pole_tolerance();
    const double gap = 2.0 * pole_tol;
    const double tail_scale = fam.ellipsoid().max_axis_sq();

    std::vector<Interval> intervals;
    intervals.push_back({0.0, poles.front(), true, false});
    for (std::size_t k = 0; k + 1 < poles.size(); ++k) intervals.push_back({poles[k], poles[k + 1], false, false});
    intervals.push_back({poles.back(), 0.0, false, true});

    TangencySet out;
    std::vector<TangencyParameter> found;
    auto g_only = [&](double l) { return disc(l).g; };
    auto accept = [&](double lambda, bool is_double) {
        if (fam.near_pole(lambda)) {
            out.spurious.push_back(lambda);
            return;
        }
        found.push_back({lambda, is_double});
    };

    double largest_ratio = 0.0;
    for (const auto& iv : intervals) {
        const auto grid = interval_grid(iv, opts.grid_per_interval, gap, tail_scale);
        if (grid.size() < 2) continue;
        std::vector<double> g(grid.size());
        for (std::size_t j = 0; j < grid.size(); ++j) {
            const auto val = disc(grid[j]);
            g[j] = val.g;
            if (val.scale > 0.0) largest_ratio = std::max(largest_ratio, std::abs(val.g) / val.scale);
        }

        for (std::size_t j = 0; j + 1 < grid.size(); ++j) {
            if (g[j] == 0.0) {
                accept(grid[j], false);
                continue;
            }
            if (g[j] * g[j + 1] < 0.0) {
                boost::math::tools::eps_tolerance<double> tol(52);
                std::uintmax_t iters = 200;
                const auto [a, b] = boost::math::tools::toms748_solve(g_only, grid[j], grid[j + 1], g[j],
                                                                      g[j + 1], tol, iters);
                const double root = 0.5 * (a + b);
                const auto val = disc(root);
                if (iters >= 200 || std::abs(val.g) > opts.verify_tol * val.scale) {
                    throw Error(ErrorKind::RootIsolationFailure,
                                "bracketed root near lambda = " + std::to_string(root) + " failed to verify");
                }
                accept(root, false);
            }
        }
        if (!grid.empty() && g.back() == 0.0) accept(grid.back(), false);

        // tangential zeros: local minima of |G| with no sign change
        for (std::size_t j = 1; j + 1 < grid.size(); ++j) {
            const double s = g[j] > 0.0 ? 1.0 : -1.0;
            if (g[j - 1] * s <= 0.0 || g[j + 1] * s <= 0.0) continue;
            if (!(std::abs(g[j]) < std::abs(g[j - 1]) && std::abs(g[j]) <= std::abs(g[j + 1]))) continue;
            const auto [lmin, gmin] = boost::math::tools::brent_find_minima(
                [&](double l) { return s * g_only(l); }, grid[j - 1], grid[j + 1], 52);
            const auto val = disc(lmin);
            if (std::abs(gmin) <= opts.verify_tol * val.scale) accept(lmin, true);
        }
    }

    // A line (nearly) tangent to every member leaves G at rounding level
    // everywhere; no root it produces means anything.
    if (largest_ratio <= opts.degenerate_tol) {
        throw Error(ErrorKind::RootIsolationFailure,
                    "line is tangent to the whole family to within " + std::to_string(largest_ratio));
    }

    std::sort(found.begin(), found.end(), [](const auto& l, const auto& r) { return l.lambda < r.lambda; });
    // G * prod c_i has degree n, one less on the null cone
    const std::size_t degree_bound = fam.dim() - (lightlike ? 2 : 1);
    std::size_t counted = 0;
    for (const auto& p : found) counted += p.double_root ? 2 : 1;
    if (counted > degree_bound) {
        throw Error(ErrorKind::RootIsolationFailure,
                    "found " + std::to_string(counted) + " roots, more than the degree bound " +
                        std::to_string(degree_bound));
    }
    out.params = std::move(found);
    return out;
}

}  // namespace pebill
