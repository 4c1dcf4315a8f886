#include "pebill/lorentz_oval.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/toms748_solve.hpp>

namespace pebill {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct BumpJet {
    double value;
    double d1;
    double d2;
};

BumpJet bump_jet(const RadialBump& b, double theta) {
    const double d = angle_difference(theta, b.center);
    const double s = d / b.half_width;
    if (std::abs(s) >= 1.0) return {0.0, 0.0, 0.0};
    const double w = b.half_width;
    const double u = 1.0 - s * s;
    const double phi = u * u * u * u;
    const double dphi = -8.0 * s * u * u * u / w;
    const double ddphi = (-8.0 * u * u * u + 48.0 * s * s * u * u) / (w * w);
    const double lin = b.amplitude + b.tilt * d;
    return {lin * phi, b.tilt * phi + lin * dphi, 2.0 * b.tilt * dphi + lin * ddphi};
}

double coordinate(const Point2& p, ChordDirection dir) { return dir == ChordDirection::Vertical ? p.x() : p.y(); }

}  // namespace

double wrap_angle(double theta) {
    double t = std::fmod(theta, kTwoPi);
    if (t < 0.0) t += kTwoPi;
    if (t >= kTwoPi) t -= kTwoPi;
    return t;
}

double angle_difference(double a, double b) {
    double d = std::remainder(a - b, kTwoPi);
    if (d <= -std::numbers::pi) d += kTwoPi;
    return d;
}

// ---------------------------------------------------------------------------
// OvalCurve

OvalCurve::OvalCurve(Representation rep, const Matrix2& q, const Point2& center, std::vector<RadialBump> bumps)
    : rep_(rep), q_(q), center_(center), bumps_(std::move(bumps)) {
    if (std::abs(q_(0, 1) - q_(1, 0)) > 1e-14 * q_.norm()) {
        throw Error(ErrorKind::InvalidArgument, "conic form must be symmetric");
    }
    if (!(q_(0, 0) > 0.0) || !(q_.determinant() > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "conic form must be positive definite");
    }
    for (const auto& b : bumps_) {
        if (!(b.half_width > 0.0) || b.half_width > std::numbers::pi) {
            throw Error(ErrorKind::InvalidArgument, "bump half-width must lie in (0, pi]");
        }
    }
    constexpr int samples = 4096;
    for (int j = 0; j < samples; ++j) {
        const double theta = kTwoPi * j / samples;
        if (!(radius(theta) > 0.0)) {
            throw Error(ErrorKind::ConvexityViolation, "radius is not positive at theta = " + std::to_string(theta));
        }
    }
    const double kmin = min_curvature(samples);
    if (!(kmin > 0.0)) {
        throw Error(ErrorKind::ConvexityViolation, "curvature reaches " + std::to_string(kmin));
    }
    locate_extrema();
}

OvalCurve OvalCurve::ellipse(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) throw Error(ErrorKind::InvalidArgument, "ellipse semi-axes must be positive");
    Matrix2 q = Matrix2::Zero();
    q(0, 0) = 1.0 / (a * a);
    q(1, 1) = 1.0 / (b * b);
    return {Representation::EllipseImplicit, q, Point2::Zero(), {}};
}

OvalCurve OvalCurve::circle(double radius) { return ellipse(radius, radius); }

OvalCurve OvalCurve::conic(const Matrix2& q, const Point2& center) {
    return {Representation::EllipseImplicit, q, center, {}};
}

OvalCurve OvalCurve::radial(const Matrix2& q, const Point2& center, std::vector<RadialBump> bumps) {
    return {Representation::RadialPerturbed, q, center, std::move(bumps)};
}

OvalCurve::RadialJet OvalCurve::jet(double theta) const {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const double a = q_(0, 0);
    const double b = q_(0, 1);
    const double d = q_(1, 1);
    const double q = a * c * c + 2.0 * b * c * s + d * s * s;
    const double dq = 2.0 * (d - a) * c * s + 2.0 * b * (c * c - s * s);
    const double ddq = 2.0 * (d - a) * (c * c - s * s) - 8.0 * b * c * s;
    const double q12 = std::sqrt(q);
    const double q32 = q * q12;
    const double q52 = q32 * q;
    RadialJet j{1.0 / q12, -0.5 * dq / q32, 0.75 * dq * dq / q52 - 0.5 * ddq / q32};
    for (const auto& bump : bumps_) {
        const auto bj = bump_jet(bump, theta);
        j.r += bj.value;
        j.dr += bj.d1;
        j.ddr += bj.d2;
    }
    return j;
}

double OvalCurve::radius(double theta) const { return jet(theta).r; }

Point2 OvalCurve::point(double theta) const {
    const double r = radius(theta);
    return center_ + r * Point2(std::cos(theta), std::sin(theta));
}

Point2 OvalCurve::tangent(double theta) const {
    const auto j = jet(theta);
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return {j.dr * c - j.r * s, j.dr * s + j.r * c};
}

double OvalCurve::slope(double theta) const {
    if (bumps_.empty()) {
        // implicit gradient of the conic: better conditioned than the polar jet
        const Point2 g = q_ * (point(theta) - center_);
        if (g.y() == 0.0) return std::numeric_limits<double>::infinity();
        return -g.x() / g.y();
    }
    const Point2 t = tangent(theta);
    if (t.x() == 0.0) return std::numeric_limits<double>::infinity();
    return t.y() / t.x();
}

double OvalCurve::curvature(double theta) const {
    const auto j = jet(theta);
    const double num = j.r * j.r + 2.0 * j.dr * j.dr - j.r * j.ddr;
    const double den = std::pow(j.r * j.r + j.dr * j.dr, 1.5);
    return num / den;
}

double OvalCurve::parameter_of(const Point2& p) const {
    const Point2 d = p - center_;
    return wrap_angle(std::atan2(d.y(), d.x()));
}

double OvalCurve::min_curvature(int samples) const {
    double kmin = std::numeric_limits<double>::infinity();
    for (int j = 0; j < samples; ++j) kmin = std::min(kmin, curvature(kTwoPi * j / samples));
    return kmin;
}

std::pair<double, double> OvalCurve::extrema(ChordDirection dir) const {
    return dir == ChordDirection::Vertical ? x_extrema_ : y_extrema_;
}

void OvalCurve::locate_extrema() {
    constexpr int samples = 1024;
    const double step = kTwoPi / samples;
    auto refine = [&](ChordDirection dir, double sign) {
        int best = 0;
        double best_val = std::numeric_limits<double>::infinity();
        for (int j = 0; j < samples; ++j) {
            const double v = sign * coordinate(point(step * j), dir);
            if (v < best_val) {
                best_val = v;
                best = j;
            }
        }
        const double centre = step * best;
        const auto res = boost::math::tools::brent_find_minima(
            [&](double t) { return sign * coordinate(point(t), dir); }, centre - step, centre + step, 52);
        return wrap_angle(res.first);
    };
    x_extrema_ = {refine(ChordDirection::Vertical, 1.0), refine(ChordDirection::Vertical, -1.0)};
    y_extrema_ = {refine(ChordDirection::Horizontal, 1.0), refine(ChordDirection::Horizontal, -1.0)};
}

// ---------------------------------------------------------------------------
// Oval map

namespace {

// Second intersection of a null line through p with a bump-free conic, by Vieta.
Point2 conic_chord_point(const OvalCurve& c, const Point2& p, ChordDirection dir) {
    const Matrix2& q = c.base_form();
    const Point2 rel = p - c.center();
    Point2 other = rel;
    if (dir == ChordDirection::Vertical) other.y() = -2.0 * q(0, 1) * rel.x() / q(1, 1) - rel.y();
    else other.x() = -2.0 * q(0, 1) * rel.y() / q(0, 0) - rel.x();
    return c.center() + other;
}

double conic_slope_at(const OvalCurve& c, const Point2& p) {
    const Point2 g = c.base_form() * (p - c.center());
    if (g.y() == 0.0) return std::numeric_limits<double>::infinity();
    return -g.x() / g.y();
}

}  // namespace

double chord_step(const OvalCurve& c, double s, ChordDirection dir) {
    const auto [arg_min, arg_max] = c.extrema(dir);
    const Point2 p = c.point(s);
    const double f0 = coordinate(p, dir);
    const double fmin = coordinate(c.point(arg_min), dir);
    const double fmax = coordinate(c.point(arg_max), dir);
    const double extent = fmax - fmin;
    if (f0 - fmin <= 1e-12 * extent || fmax - f0 <= 1e-12 * extent) {
        throw Error(ErrorKind::DegenerateChord, "chord through an extremal point has zero length");
    }

    if (c.representation() == OvalCurve::Representation::EllipseImplicit) {
        return c.parameter_of(conic_chord_point(c, p, dir));
    }

    // x (or y) is monotone on each of the two arcs between its extrema
    const double len_a = wrap_angle(arg_max - arg_min);
    const bool on_a = wrap_angle(s - arg_min) < len_a;
    const double start = on_a ? arg_max : arg_min;
    const double len = on_a ? kTwoPi - len_a : len_a;
    auto g = [&](double t) { return coordinate(c.point(t), dir) - f0; };
    const double g_start = (on_a ? fmax : fmin) - f0;
    const double g_end = (on_a ? fmin : fmax) - f0;
    boost::math::tools::eps_tolerance<double> tol(52);
    std::uintmax_t iters = 200;
    const auto [lo, hi] =
        boost::math::tools::toms748_solve(g, start, start + len, g_start, g_end, tol, iters);
    return wrap_angle(0.5 * (lo + hi));
}

double oval_map(const OvalCurve& c, double s) {
    return chord_step(c, chord_step(c, s, ChordDirection::Vertical), ChordDirection::Horizontal);
}

double oval_map_power(const OvalCurve& c, double s, int times) {
    for (int k = 0; k < times; ++k) s = oval_map(c, s);
    return s;
}

// ---------------------------------------------------------------------------
// Acceleration

double speed_factor(double slope, ChordDirection incoming) {
    if (slope == 0.0) throw Error(ErrorKind::ZeroSlope, "speed factor needs a nonzero slope");
    return incoming == ChordDirection::Horizontal ? slope : 1.0 / slope;
}

double acceleration_factor(const NullPolygon& poly) {
    if (poly.slopes.size() < 2 || poly.slopes.size() % 2 != 0) {
        throw Error(ErrorKind::InvalidArgument, "a closed null polygon has an even number (>= 2) of slopes");
    }
    double even = 1.0;
    double odd = 1.0;
    for (std::size_t i = 0; i < poly.slopes.size(); ++i) {
        const double t = poly.slopes[i];
        if (t == 0.0) throw Error(ErrorKind::ZeroSlope, "slope at P_" + std::to_string(i + 1) + " is zero");
        // 1-based P_{i+1}: even positions sit in the numerator
        if (i % 2 == 1) even *= t;
        else odd *= t;
    }
    return even / odd;
}

double simulate_speed(const OvalCurve& c, const NullPolygon& poly, int periods) {
    const std::size_t m = poly.points.size();
    if (m < 4 || m % 2 != 0) throw Error(ErrorKind::InvalidArgument, "polygon needs 2n >= 4 points");
    if (periods < 1) throw Error(ErrorKind::InvalidArgument, "periods must be positive");
    const double scale = (poly.points[0] - c.center()).norm();
    const double sigma = poly.points[1].x() > poly.points[0].x() ? 1.0 : -1.0;

    // metric dx dy, polarised
    auto dot = [](const Point2& a, const Point2& b) { return 0.5 * (a.x() * b.y() + a.y() * b.x()); };

    Point2 velocity(sigma, 0.0);
    double s = poly.params.size() == m ? poly.params[0] : c.parameter_of(poly.points[0]);
    for (std::size_t hit = 1; hit <= m * static_cast<std::size_t>(periods); ++hit) {
        const bool horizontal = std::abs(velocity.x()) > std::abs(velocity.y());
        s = chord_step(c, s, horizontal ? ChordDirection::Horizontal : ChordDirection::Vertical);
        const Point2& expected = poly.points[hit % m];
        if ((c.point(s) - expected).norm() > 1e-7 * scale) {
            throw Error(ErrorKind::InvalidArgument,
                        "polygon point P_" + std::to_string(hit % m + 1) + " is not on the orbit of this curve");
        }
        const Point2 t = c.tangent(s);
        const Point2 normal(t.x(), -t.y());
        const double nn = dot(normal, normal);
        if (nn == 0.0) throw Error(ErrorKind::ZeroSlope, "tangent is light-like at a reflection point");
        velocity -= (2.0 * dot(velocity, normal) / nn) * normal;
    }
    return velocity.x() / sigma;
}

// ---------------------------------------------------------------------------
// Periodic orbits

void validate_polygon_geometry(std::span<const Point2> points, double tol) {
    const std::size_t m = points.size();
    if (m < 4 || m % 2 != 0) throw Error(ErrorKind::InvalidArgument, "polygon needs 2n >= 4 points");
    double scale = 0.0;
    for (const auto& p : points) scale = std::max(scale, p.cwiseAbs().maxCoeff());
    for (std::size_t i = 0; i < m; ++i) {
        const Point2& a = points[i];
        const Point2& b = points[(i + 1) % m];
        // i even (0-based) -> chord P_{i+1} P_{i+2} is horizontal
        const bool horizontal = i % 2 == 0;
        const double shared = horizontal ? std::abs(a.y() - b.y()) : std::abs(a.x() - b.x());
        const double along = horizontal ? std::abs(a.x() - b.x()) : std::abs(a.y() - b.y());
        if (shared > tol * std::max(scale, 1.0) || along <= tol * std::max(scale, 1.0)) {
            throw Error(ErrorKind::InvalidArgument, "P_" + std::to_string(i + 1) + " -> P_" +
                                                        std::to_string((i + 1) % m + 1) + " is not a " +
                                                        (horizontal ? "horizontal" : "vertical") + " chord");
        }
    }
}

NullPolygon reversed(const NullPolygon& poly) {
    const std::size_t m = poly.points.size();
    NullPolygon out;
    auto order = [&](std::size_t k) { return (m + 1 - k) % m; };  // P_2, P_1, P_2n, ..., P_3
    for (std::size_t k = 0; k < m; ++k) {
        const std::size_t src = order(k);
        out.points.push_back(poly.points[src]);
        if (poly.params.size() == m) out.params.push_back(poly.params[src]);
        if (poly.slopes.size() == m) out.slopes.push_back(poly.slopes[src]);
    }
    return out;
}

NullPolygon polygon_from_parameter(const OvalCurve& c, int n, double s0) {
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "half-period must be positive");
    // s0 -V-> s1 -H-> s2 -V-> ... ; P_1 = s1 so that P_1 -> P_2 is horizontal
    NullPolygon poly;
    if (c.representation() == OvalCurve::Representation::EllipseImplicit) {
        // chase points rather than angles: the Vieta step is exact up to one
        // rounding per coordinate, while angles lose digits near the axes
        const Point2 start = c.point(s0);
        Point2 p = start;
        for (int k = 0; k < 2 * n; ++k) {
            const auto dir = k % 2 == 0 ? ChordDirection::Vertical : ChordDirection::Horizontal;
            chord_step(c, c.parameter_of(p), dir);  // degeneracy check only
            p = conic_chord_point(c, p, dir);
            const Point2 q = k == 2 * n - 1 ? start : p;
            poly.points.push_back(q);
            poly.params.push_back(k == 2 * n - 1 ? wrap_angle(s0) : c.parameter_of(q));
            poly.slopes.push_back(conic_slope_at(c, q));
        }
        return poly;
    }
    std::vector<double> seq{s0};
    for (int k = 0; k < 2 * n; ++k) {
        const auto dir = k % 2 == 0 ? ChordDirection::Vertical : ChordDirection::Horizontal;
        seq.push_back(chord_step(c, seq.back(), dir));
    }
    for (int k = 1; k <= 2 * n; ++k) {
        const double s = k == 2 * n ? s0 : seq[static_cast<std::size_t>(k)];
        poly.params.push_back(s);
        poly.points.push_back(c.point(s));
        poly.slopes.push_back(c.slope(s));
    }
    return poly;
}

NullPolygon find_periodic_orbit(const OvalCurve& c, int n, double seed, const PeriodicOrbitOptions& opts) {
    if (n < 2) throw Error(ErrorKind::InvalidArgument, "half-period must be at least 2");
    auto defect = [&](double s) { return angle_difference(oval_map_power(c, s, n), s); };

    double s = wrap_angle(seed);
    double g = defect(s);
    for (int it = 0; it < opts.max_iterations && std::abs(g) > opts.residual_tol; ++it) {
        const double h = opts.fd_step;
        const double dg = (defect(s + h) - defect(s - h)) / (2.0 * h);
        if (std::abs(dg) < 1e-14) break;
        double step = -g / dg;
        bool improved = false;
        for (int halving = 0; halving < 40; ++halving, step *= 0.5) {
            try {
                const double trial = wrap_angle(s + step);
                const double gt = defect(trial);
                if (std::abs(gt) < std::abs(g)) {
                    s = trial;
                    g = gt;
                    improved = true;
                    break;
                }
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::DegenerateChord) throw;
            }
        }
        if (!improved) break;
    }
    if (!(std::abs(g) <= opts.residual_tol)) {
        throw Error(ErrorKind::NoConvergence, "closure defect " + std::to_string(std::abs(g)) + " after Newton");
    }
    return polygon_from_parameter(c, n, s);
}

double return_map_derivative(const OvalCurve& c, const NullPolygon& poly) {
    const std::size_t m = poly.points.size();
    if (m < 4 || m % 2 != 0) throw Error(ErrorKind::InvalidArgument, "polygon needs 2n >= 4 points");
    const int n = static_cast<int>(m / 2);
    const double s0 = poly.params.size() == m ? poly.params.back() : c.parameter_of(poly.points.back());
    auto central = [&](double h) {
        return angle_difference(oval_map_power(c, s0 + h, n), oval_map_power(c, s0 - h, n)) / (2.0 * h);
    };

    constexpr int levels = 8;
    std::vector<std::vector<double>> table(levels);
    double h = 1e-2;
    double previous = std::numeric_limits<double>::quiet_NaN();
    for (int k = 0; k < levels; ++k, h *= 0.5) {
        table[k].push_back(central(h));
        for (int j = 1; j <= k; ++j) {
            const double f = std::pow(4.0, j);
            table[k].push_back(table[k][j - 1] + (table[k][j - 1] - table[k - 1][j - 1]) / (f - 1.0));
        }
        const double current = table[k][k];
        if (k > 1 && std::abs(current - previous) <= 1e-11 * std::max(1.0, std::abs(current))) return current;
        previous = current;
    }
    const double last = table[levels - 1][levels - 1];
    const double before = table[levels - 2][levels - 2];
    if (std::abs(last - before) <= 1e-8 * std::max(1.0, std::abs(last))) return last;
    throw Error(ErrorKind::NoConvergence, "Richardson extrapolation of the return-map derivative did not settle");
}

// ---------------------------------------------------------------------------
// Table synthesis

namespace {

/// Every other polygon point must lie strictly on one side of the prescribed
/// tangent line; otherwise no convex curve has these slopes.
void check_slope_feasibility(std::span<const Point2> points, std::span<const double> slopes) {
    double scale = 0.0;
    for (const auto& p : points) scale = std::max(scale, p.norm());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double t = slopes[i];
        if (!std::isfinite(t) || t == 0.0) {
            throw Error(ErrorKind::InfeasibleSlopes, "slope at P_" + std::to_string(i + 1) +
                                                         " is null (zero or vertical), which a chord through "
                                                         "it rules out");
        }
        int side = 0;
        for (std::size_t j = 0; j < points.size(); ++j) {
            if (j == i) continue;
            const Point2 d = points[j] - points[i];
            const double cross = d.y() - t * d.x();
            const int s = cross > 1e-12 * scale ? 1 : (cross < -1e-12 * scale ? -1 : 0);
            if (s == 0 || (side != 0 && s != side)) {
                throw Error(ErrorKind::InfeasibleSlopes,
                            "tangent prescribed at P_" + std::to_string(i + 1) + " separates the other points");
            }
            side = s;
        }
    }
}

std::optional<Matrix2> solve_conic(const Eigen::MatrixXd& design, const Eigen::VectorXd& rhs) {
    const Eigen::Vector3d coef = design.completeOrthogonalDecomposition().solve(rhs);
    Matrix2 q;
    q << coef[0], coef[1], coef[1], coef[2];
    if (q(0, 0) > 0.0 && q.determinant() > 0.0) return q;
    return std::nullopt;
}

// Base conics to try, best first: least squares on the through-point and the
// tangency conditions together, then on the points alone, then a circle.
std::vector<Matrix2> candidate_base_conics(std::span<const Point2> points, std::span<const double> slopes,
                                           const Point2& center) {
    const auto m = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixXd design(2 * m, 3);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2 * m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const Point2 d = points[static_cast<std::size_t>(i)] - center;
        const double t = slopes[static_cast<std::size_t>(i)];
        design.row(i) << d.x() * d.x(), 2.0 * d.x() * d.y(), d.y() * d.y();
        rhs[i] = 1.0;
        // (Q d) . (1, t) = 0, scaled to be comparable with the point rows
        const double scale = d.norm() * std::hypot(1.0, t);
        design.row(m + i) << d.x() / scale, (d.y() + t * d.x()) / scale, t * d.y() / scale;
    }
    std::vector<Matrix2> out;
    if (auto q = solve_conic(design, rhs)) out.push_back(*q);
    if (auto q = solve_conic(design.topRows(m), rhs.head(m))) out.push_back(*q);
    double mean_r = 0.0;
    for (const auto& p : points) mean_r += (p - center).norm();
    mean_r /= static_cast<double>(points.size());
    out.push_back(Matrix2::Identity() / (mean_r * mean_r));
    return out;
}

}  // namespace

OvalCurve build_accelerating_table(std::span<const Point2> points, std::span<const double> slopes) {
    if (points.size() != slopes.size()) {
        throw Error(ErrorKind::DimensionMismatch, "need one slope per polygon point");
    }
    validate_polygon_geometry(points);
    check_slope_feasibility(points, slopes);

    const Point2 center =
        std::accumulate(points.begin(), points.end(), Point2(Point2::Zero())) / static_cast<double>(points.size());
    const std::size_t m = points.size();
    std::string last_error;
    for (const Matrix2& q : candidate_base_conics(points, slopes, center)) {
        const OvalCurve base = OvalCurve::conic(q, center);

        std::vector<double> angles(m);
        for (std::size_t i = 0; i < m; ++i) angles[i] = base.parameter_of(points[i]);
        std::vector<std::size_t> order(m);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return angles[a] < angles[b]; });
        std::vector<double> gap(m);
        for (std::size_t k = 0; k < m; ++k) {
            const std::size_t i = order[k];
            const std::size_t prev = order[(k + m - 1) % m];
            const std::size_t next = order[(k + 1) % m];
            gap[i] = std::min(wrap_angle(angles[i] - angles[prev]), wrap_angle(angles[next] - angles[i]));
            if (!(gap[i] > 0.0)) throw Error(ErrorKind::InvalidArgument, "polygon points coincide in angle");
        }

        // Through-point and slope conditions at the bump centre form the 2x2 system
        // [phi(0) 0; phi'(0) phi(0)] [amp; tilt] = [dr; dr']. For the polynomial
        // bump phi(0) = 1 and phi'(0) = 0, so it decouples.
        std::vector<RadialBump> bumps(m);
        for (std::size_t i = 0; i < m; ++i) {
            const double theta = angles[i];
            const double c = std::cos(theta);
            const double s = std::sin(theta);
            const double t = slopes[i];
            const double r_target = (points[i] - center).norm();
            const double denom = t * c - s;
            if (std::abs(denom) <= 1e-12 * (std::abs(t) + 1.0)) {
                throw Error(ErrorKind::InfeasibleSlopes, "slope at P_" + std::to_string(i + 1) + " is radial");
            }
            const double dr_target = r_target * (c + t * s) / denom;
            const auto j = base.jet(theta);
            bumps[i] = {theta, 0.0, r_target - j.r, dr_target - j.dr};
        }

        for (const double fraction : {0.95, 0.85, 0.7, 0.55, 0.4, 0.25}) {
            for (std::size_t i = 0; i < m; ++i) bumps[i].half_width = fraction * gap[i];
            try {
                return OvalCurve::radial(q, center, bumps);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::ConvexityViolation) throw;
                last_error = e.what();
            }
        }
    }
    throw Error(ErrorKind::ConvexityViolation, "no base conic and bump width keep the table convex (" + last_error + ")");
}

// ---------------------------------------------------------------------------
// Charts

Point2 to_null_chart(const Point2& p) {
    return Point2(p.x() + p.y(), p.x() - p.y()) / std::numbers::sqrt2;
}

Point2 from_null_chart(const Point2& p) { return to_null_chart(p); }

OvalCurve null_chart_image(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) throw Error(ErrorKind::InvalidArgument, "ellipse semi-axes must be positive");
    Matrix2 r;
    r << 1.0, 1.0, 1.0, -1.0;
    r /= std::numbers::sqrt2;
    const Matrix2 a_diag = Eigen::Vector2d(1.0 / (a * a), 1.0 / (b * b)).asDiagonal();
    Matrix2 q = r.transpose() * a_diag * r;
    q(1, 0) = q(0, 1);
    return OvalCurve::conic(q);
}

}  // namespace pebill
