#include <cmath>
#include <limits>

#include "doctest.h"
#include "pebill/pecore.hpp"

using namespace pebill;

TEST_CASE("inner product in diagonal signatures") {
    CHECK(inner(Vec{{1.0, 1.0}}, Vec{{1.0, 1.0}}, Signature(1, 1)) == 0.0);
    CHECK(inner(Vec{{1.0, 0.0}}, Vec{{0.0, 1.0}}, Signature(1, 1)) == 0.0);
    CHECK(inner(Vec{{1.0, 0.0}}, Vec{{0.0, 1.0}}, Signature(2, 0)) == 0.0);
    CHECK(inner(Vec{{3.0, 4.0}}, Vec{{3.0, 4.0}}, Signature(2, 0)) == 25.0);
    CHECK(inner(Vec{{1.0, 2.0, 3.0}}, Vec{{1.0, 2.0, 3.0}}, Signature(2, 1)) == -4.0);
    CHECK_THROWS_AS(inner(Vec{{1.0, 2.0}}, Vec{{1.0, 2.0}}, Signature(2, 1)), Error);
}

TEST_CASE("accurate_dot survives cancellation") {
    // 1e16 + 1 - 1e16: a naive sum loses the 1
    const Vec u{{1e16, 1.0, -1e16}};
    const Vec ones = Vec::Ones(3);
    CHECK(accurate_dot(u, ones) == 1.0);
    CHECK(accurate_dot(u, ones, Vec{{1.0, -1.0, 1.0}}) == -1.0);
}

TEST_CASE("classify_vector") {
    const Signature s(1, 1);
    CHECK(classify_vector(Vec{{1.0, 0.0}}, s) == LineType::Spacelike);
    CHECK(classify_vector(Vec{{1.0, 1.0}}, s) == LineType::Lightlike);
    CHECK(classify_vector(Vec{{0.0, 1.0}}, s) == LineType::Timelike);
    // relative threshold: a tiny perturbation of a null vector stays null
    CHECK(classify_vector(Vec{{1e6, 1e6 + 1e-5}}, s) == LineType::Lightlike);
    CHECK_THROWS_AS(classify_vector(Vec{{0.0, 0.0}}, s), Error);
}

TEST_CASE("line_canonicalize") {
    auto r = line_canonicalize({Vec{{5.0, 5.0}}, Vec{{2.0, 2.0}}});
    CHECK(r.x.norm() == doctest::Approx(0.0));
    CHECK(r.v[0] == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(r.v[1] == doctest::Approx(1.0 / std::sqrt(2.0)));

    r = line_canonicalize({Vec{{1.0, 0.0}}, Vec{{0.0, 3.0}}});
    CHECK(r.x[0] == doctest::Approx(1.0));
    CHECK(r.v[1] == doctest::Approx(1.0));

    // independent oracle: minimise |x + t v|^2 by sampling t finely
    r = line_canonicalize({Vec{{2.0, 1.0}}, Vec{{1.0, 0.0}}});
    double best = std::numeric_limits<double>::infinity();
    for (int i = -4000; i <= 4000; ++i) {
        const double t = i * 1e-3;
        best = std::min(best, (Vec{{2.0 + t, 1.0}}).norm());
    }
    CHECK(r.x.norm() == doctest::Approx(best).epsilon(1e-9));
    CHECK(r.x[1] == doctest::Approx(1.0));
    CHECK(r.v[0] == doctest::Approx(1.0));

    CHECK_THROWS_AS(line_canonicalize({Vec{{1.0, 0.0}}, Vec{{0.0, 0.0}}}), Error);
}

TEST_CASE("quadric_eval") {
    const Quadric q{Vec{{4.0, 1.0}}};
    CHECK(quadric_eval(q, Vec{{0.0, 1.0}}) == doctest::Approx(0.0));
    CHECK(quadric_eval(q, Vec{{0.0, 0.0}}) == doctest::Approx(-1.0));
    CHECK(quadric_eval(Quadric{Vec{{1.0, -2.0}}}, Vec{{1.0, 0.0}}) == doctest::Approx(0.0));
}

TEST_CASE("ellipsoid form and level") {
    const Ellipsoid e(Vec{{2.0, 1.0}});
    CHECK(e.level(Vec{{1.6, -0.6}}) == doctest::Approx(0.0));
    CHECK(e.form(Vec{{0.0, 1.0}}, Vec{{1.0, -1.0}}) == doctest::Approx(-1.0));
    CHECK(e.max_axis_sq() == 4.0);
    CHECK_THROWS_AS(Ellipsoid(Vec{{1.0, 0.0}}), Error);
}
