#include "pebill/billiard.hpp"

#include <cmath>
#include <random>

namespace pebill {

namespace {

void require_on_boundary(const RayState& r, const Ellipsoid& ell, const Tolerances& tol, const char* where) {
    require_same_dim(static_cast<std::size_t>(r.x.size()), ell.dim(), where);
    require_same_dim(static_cast<std::size_t>(r.v.size()), ell.dim(), where);
    const double level = ell.level(r.x);
    if (!(std::abs(level) <= tol.boundary)) {
        throw Error(ErrorKind::OffBoundary,
                    std::string(where) + ": |Ax.x - 1| = " + std::to_string(std::abs(level)));
    }
}

double denominator(std::size_t i, std::size_t k, const Ellipsoid& ell, const Signature& sig) {
    const double ai = ell.axes()[static_cast<Eigen::Index>(i)];
    const double ak = ell.axes()[static_cast<Eigen::Index>(k)];
    return sig.e(i) * ak * ak - sig.e(k) * ai * ai;
}

}  // namespace

RayState advance_to_boundary(const RayState& r, const Ellipsoid& ell, const Tolerances& tol) {
    require_on_boundary(r, ell, tol, "advance_to_boundary");
    const double h = ell.form(r.x, r.v);
    if (!(h < 0.0) || std::abs(h) < tol.grazing * r.x.norm() * r.v.norm()) {
        throw Error(ErrorKind::NotInward, "Ax.v = " + std::to_string(h) + " is not inward");
    }
    const double t = -2.0 * h / ell.form(r.v, r.v);
    Vec y = r.x + t * r.v;
    // The closed form already gives Ay.v = -Ax.v exactly; the projection
    // removes the level error along the normal, not along v. A step along v
    // shifts H by level * (Av.v) / H, which is large on short, fast chords.
    const Vec grad = ell.apply(y);
    const double g2 = grad.squaredNorm();
    if (g2 != 0.0) y -= (ell.level(y) / (2.0 * g2)) * grad;
    return {std::move(y), r.v};
}

RayState reflect(const RayState& r, const Ellipsoid& ell, const Signature& sig, const Tolerances& tol) {
    require_on_boundary(r, ell, tol, "reflect");
    require_same_dim(ell.dim(), sig.dim(), "reflect");
    const Vec covector = ell.apply(r.x);
    const Vec normal = sig.signs().cwiseProduct(covector);
    const double nn = inner(normal, normal, sig);
    if (std::abs(nn) <= tol.null_normal * normal.squaredNorm()) {
        throw Error(ErrorKind::NullNormal, "the normal is light-like at this boundary point");
    }
    // <v, n> equals the pairing Ax.v; both pairings use the same rounded
    // covector so the reflection is exact for a slightly tilted tangent plane
    const double vn = accurate_dot(covector, r.v);
    return {r.x, r.v - (2.0 * vn / nn) * normal};
}

RayState billiard_map(const RayState& r, const Ellipsoid& ell, const Signature& sig, const Tolerances& tol) {
    return reflect(advance_to_boundary(r, ell, tol), ell, sig, tol);
}

double joachimsthal(const RayState& r, const Ellipsoid& ell, const Tolerances& tol) {
    require_on_boundary(r, ell, tol, "joachimsthal");
    return ell.form(r.x, r.v);
}

double joachimsthal_extended(const RayState& r, const Ellipsoid& ell) {
    const double b = ell.form(r.x, r.v);
    const double disc = b * b - ell.form(r.v, r.v) * ell.level(r.x);
    if (disc < 0.0) return std::numeric_limits<double>::quiet_NaN();
    return -std::sqrt(disc);
}

void check_nonresonant(const Ellipsoid& ell, const Signature& sig) {
    require_same_dim(ell.dim(), sig.dim(), "check_nonresonant");
    for (std::size_t k = 0; k < ell.dim(); ++k) {
        for (std::size_t i = 0; i < ell.dim(); ++i) {
            if (i == k) continue;
            const double ai = ell.axes()[static_cast<Eigen::Index>(i)];
            const double ak = ell.axes()[static_cast<Eigen::Index>(k)];
            if (std::abs(denominator(i, k, ell, sig)) <= 1e-12 * (ai * ai + ak * ak)) {
                throw Error(ErrorKind::ResonantAxes, "axes " + std::to_string(i + 1) + " and " +
                                                         std::to_string(k + 1) +
                                                         " coincide within one metric block");
            }
        }
    }
}

double integral_F(std::size_t k, const Vec& x, const Vec& v, const Ellipsoid& ell, const Signature& sig) {
    require_same_dim(static_cast<std::size_t>(x.size()), ell.dim(), "integral_F");
    require_same_dim(static_cast<std::size_t>(v.size()), ell.dim(), "integral_F");
    require_same_dim(ell.dim(), sig.dim(), "integral_F");
    if (k >= ell.dim()) throw Error(ErrorKind::InvalidArgument, "integral index out of range");
    check_nonresonant(ell, sig);
    const auto kk = static_cast<Eigen::Index>(k);
    double f = v[kk] * v[kk] * sig.e(k);
    for (std::size_t i = 0; i < ell.dim(); ++i) {
        if (i == k) continue;
        const auto ii = static_cast<Eigen::Index>(i);
        const double m = x[ii] * v[kk] - x[kk] * v[ii];
        f += m * m / denominator(i, k, ell, sig);
    }
    return f;
}

Vec integrals_F(const Vec& x, const Vec& v, const Ellipsoid& ell, const Signature& sig) {
    Vec out(ell.dim());
    for (std::size_t k = 0; k < ell.dim(); ++k) out[static_cast<Eigen::Index>(k)] = integral_F(k, x, v, ell, sig);
    return out;
}

OrbitRecord run_orbit(const RayState& r, std::size_t bounces, const ConfocalFamily& fam, const OrbitOptions& opts) {
    if (bounces < 1) throw Error(ErrorKind::InvalidArgument, "run_orbit needs at least one bounce");
    const Ellipsoid& ell = fam.ellipsoid();
    const Signature& sig = fam.signature();
    // Resonant tables (a circle, say) still have a billiard and H; the F_k and
    // the confocal tangency parameters are undefined there and are not recorded.
    bool resonant = false;
    try {
        check_nonresonant(ell, sig);
    } catch (const Error&) {
        resonant = true;
    }

    OrbitRecord rec;
    rec.states.reserve(bounces + 1);
    auto record = [&](const RayState& s) {
        rec.states.push_back(s);
        rec.H.push_back(ell.form(s.x, s.v));
        rec.F.push_back(resonant ? Vec() : integrals_F(s.x, s.v, ell, sig));
        if (opts.record_tangency && !resonant) rec.tangency.push_back(tangency_parameters(fam, s, opts.roots));
    };

    RayState current = r;
    try {
        joachimsthal(current, ell, opts.tol);
        record(current);
        for (std::size_t b = 0; b < bounces; ++b) {
            RayState next = billiard_map(current, ell, sig, opts.tol);
            try {
                record(next);
            } catch (const Error& e) {
                // the state itself is valid; only its invariants failed
                rec.states.pop_back();
                rec.H.resize(rec.states.size());
                rec.F.resize(rec.states.size());
                throw;
            }
            current = std::move(next);
        }
    } catch (const Error& e) {
        rec.abort = OrbitAbort{e.kind(), e.what(), rec.bounce_count()};
    }
    return rec;
}

RayState sample_ray(const Ellipsoid& ell, const Signature& sig, LineType type, std::uint64_t seed) {
    require_same_dim(ell.dim(), sig.dim(), "sample_ray");
    const auto p = static_cast<Eigen::Index>(sig.p());
    const auto q = static_cast<Eigen::Index>(sig.q());
    if ((type == LineType::Lightlike && (p < 1 || q < 1)) || (type == LineType::Spacelike && p < 1) ||
        (type == LineType::Timelike && q < 1)) {
        throw Error(ErrorKind::InvalidArgument,
                    std::string("signature admits no ") + std::string(to_string(type)) + " directions");
    }
    const auto n = static_cast<Eigen::Index>(ell.dim());
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double a_min = ell.axes().minCoeff();

    auto unit_block = [&](Eigen::Index len) {
        Vec b(len);
        double norm = 0.0;
        do {
            for (Eigen::Index i = 0; i < len; ++i) b[i] = normal(rng);
            norm = b.norm();
        } while (norm < 1e-8);
        return Vec(b / norm);
    };

    constexpr int budget = 100000;
    for (int attempt = 0; attempt < budget; ++attempt) {
        const Vec s = unit_block(n);
        const double accept = a_min * std::sqrt((s.array().square() * ell.operator_diag().array()).sum());
        if (unit(rng) > accept) continue;
        Vec x = ell.axes().cwiseProduct(s);
        x /= std::sqrt(ell.form(x, x));

        Vec v(n);
        double plus = 1.0;
        double minus = 1.0;
        if (type == LineType::Spacelike) minus = 0.9 * unit(rng);
        if (type == LineType::Timelike) plus = 0.9 * unit(rng);
        if (p > 0) v.head(p) = plus * unit_block(p);
        if (q > 0) v.tail(q) = minus * unit_block(q);

        const Vec ax = ell.apply(x);
        const double h = ax.dot(v);
        if (std::abs(h) < 1e-6 * ax.norm() * v.norm()) continue;
        if (h > 0.0) v = -v;
        return {std::move(x), std::move(v)};
    }
    throw Error(ErrorKind::ExhaustedRejection, "no admissible initial condition after rejection budget");
}

RayState sample_null_ray(const Ellipsoid& ell, const Signature& sig, std::uint64_t seed) {
    return sample_ray(ell, sig, LineType::Lightlike, seed);
}

}  // namespace pebill
