#pragma once

#include <Eigen/Core>

#include <span>
#include <vector>

#include "pebill/error.hpp"
#include "pebill/pecore.hpp"

namespace pebill {

using Point2 = Eigen::Vector2d;
using Matrix2 = Eigen::Matrix2d;

// Everything in this header lives in the null chart of the Lorentz plane: the
// metric is dx dy, so light-like directions are exactly horizontal and vertical.

enum class ChordDirection { Vertical, Horizontal };

/// Compactly supported radial perturbation (amp + tilt * d) * (1 - (d/w)^2)^4,
/// d the wrapped angle from `center`. C^3 across the edge of its support.
struct RadialBump {
    double center;
    double half_width;
    double amplitude;
    double tilt;
};

/// A closed strictly convex curve given in polar form r(theta) about an interior
/// point: a centred conic x^T Q x = 1, optionally plus radial bumps.
class OvalCurve {
public:
    enum class Representation { EllipseImplicit, RadialPerturbed };

    /// Axis-aligned ellipse x^2/a^2 + y^2/b^2 = 1 centred at the origin.
    static OvalCurve ellipse(double a, double b);
    static OvalCurve circle(double radius);
    /// Centred conic (x - c)^T Q (x - c) = 1, Q symmetric positive definite.
    static OvalCurve conic(const Matrix2& q, const Point2& center = Point2::Zero());
    /// Conic base plus bumps. Throws ConvexityViolation if the result is not strictly convex.
    static OvalCurve radial(const Matrix2& q, const Point2& center, std::vector<RadialBump> bumps);

    Representation representation() const noexcept { return rep_; }
    const Point2& center() const noexcept { return center_; }
    const Matrix2& base_form() const noexcept { return q_; }
    const std::vector<RadialBump>& bumps() const noexcept { return bumps_; }

    double radius(double theta) const;
    Point2 point(double theta) const;
    /// d point / d theta
    Point2 tangent(double theta) const;
    /// dy/dx; infinite at the two vertical-tangent points.
    double slope(double theta) const;
    double curvature(double theta) const;
    /// Polar angle of a point about the centre, in [0, 2 pi).
    double parameter_of(const Point2& p) const;

    /// Parameters where x (Vertical) or y (Horizontal) is extremal: {argmin, argmax}.
    std::pair<double, double> extrema(ChordDirection dir) const;
    /// min over a uniform sample of the signed curvature
    double min_curvature(int samples = 4096) const;

    struct RadialJet {
        double r;
        double dr;
        double ddr;
    };
    RadialJet jet(double theta) const;

private:
    OvalCurve(Representation rep, const Matrix2& q, const Point2& center, std::vector<RadialBump> bumps);
    void locate_extrema();

    Representation rep_;
    Matrix2 q_;
    Point2 center_;
    std::vector<RadialBump> bumps_;
    std::pair<double, double> x_extrema_{};
    std::pair<double, double> y_extrema_{};
};

/// Reflection points of a closed light-like orbit. P_1 -> P_2 is a horizontal
/// chord, chords alternate, and P_2n -> P_1 is vertical.
struct NullPolygon {
    std::vector<Point2> points;
    std::vector<double> params;  // curve parameters of the points, when known
    std::vector<double> slopes;

    std::size_t half_period() const noexcept { return points.size() / 2; }
};

/// The same orbit traversed backwards, re-indexed so that it again starts with
/// a horizontal chord.
NullPolygon reversed(const NullPolygon& poly);

/// Check that the points alternate horizontal/vertical chords and close up.
void validate_polygon_geometry(std::span<const Point2> points, double tol = 1e-9);

double wrap_angle(double theta);         // to [0, 2 pi)
double angle_difference(double a, double b);  // a - b wrapped to (-pi, pi]

double chord_step(const OvalCurve& c, double s, ChordDirection dir);
/// vertical chord, then horizontal chord
double oval_map(const OvalCurve& c, double s);
/// oval_map applied `times` times
double oval_map_power(const OvalCurve& c, double s, int times);

/// Signed speed multiplier at one reflection: t for a horizontal arrival, 1/t for a vertical one.
double speed_factor(double slope, ChordDirection incoming);
/// (t_2 t_4 ... t_2n) / (t_1 t_3 ... t_2n-1)
double acceleration_factor(const NullPolygon& poly);
/// Flies a unit horizontal velocity from P_1 around the polygon `periods`
/// times, reflecting in the curve at every hit, and returns the final
/// horizontal velocity in units of the initial one.
double simulate_speed(const OvalCurve& c, const NullPolygon& poly, int periods = 1);

struct PeriodicOrbitOptions {
    double residual_tol = 1e-10;
    int max_iterations = 100;
    double fd_step = 1e-6;
};

/// Fixed point of oval_map^n near `seed` by damped Newton, expanded to its 2n reflection points.
NullPolygon find_periodic_orbit(const OvalCurve& c, int n, double seed, const PeriodicOrbitOptions& opts = {});
NullPolygon polygon_from_parameter(const OvalCurve& c, int n, double s0);

/// Curve through the polygon points with the given slopes there: a conic
/// fitted through the points plus one radial bump per point.
OvalCurve build_accelerating_table(std::span<const Point2> points, std::span<const double> slopes);

/// d(oval_map^n)/ds at the periodic point, by central differences with Richardson extrapolation.
double return_map_derivative(const OvalCurve& c, const NullPolygon& poly);

/// Fixed 45 degree change between the orthonormal chart (metric diag(1,-1)) and
/// the null chart: u = (x + y)/sqrt2, w = (x - y)/sqrt2. It is an involution.
Point2 to_null_chart(const Point2& p);
Point2 from_null_chart(const Point2& p);
/// Ellipse x^2/a^2 + y^2/b^2 = 1 of the orthonormal chart as a curve in the null chart.
OvalCurve null_chart_image(double a, double b);

}  // namespace pebill
