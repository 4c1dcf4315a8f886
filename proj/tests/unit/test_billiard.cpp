#include <cmath>
#include <functional>

#include "doctest.h"
#include "pebill/billiard.hpp"

using namespace pebill;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::InvalidArgument;
}

const Ellipsoid kEll2(Vec{{2.0, 1.0}});
const Signature kLor2(1, 1);

}  // namespace

TEST_CASE("advance_to_boundary") {
    const Ellipsoid circle(Vec{{1.0, 1.0}});
    RayState y = advance_to_boundary({Vec{{0.0, 1.0}}, Vec{{0.0, -1.0}}}, circle);
    CHECK(y.x[0] == doctest::Approx(0.0));
    CHECK(y.x[1] == doctest::Approx(-1.0));

    y = advance_to_boundary({Vec{{0.0, 1.0}}, Vec{{1.0, -1.0}}}, kEll2);
    CHECK(y.x[0] == doctest::Approx(1.6).epsilon(1e-15));
    CHECK(y.x[1] == doctest::Approx(-0.6).epsilon(1e-15));
    CHECK(y.v[0] == 1.0);

    CHECK(kind_of([] { advance_to_boundary({Vec{{0.0, 1.0}}, Vec{{1.0, 0.0}}}, kEll2); }) == ErrorKind::NotInward);
    CHECK(kind_of([] { advance_to_boundary({Vec{{0.0, 0.5}}, Vec{{1.0, 0.0}}}, kEll2); }) == ErrorKind::OffBoundary);
}

TEST_CASE("reflect") {
    const RayState out = reflect({Vec{{1.6, -0.6}}, Vec{{1.0, -1.0}}}, kEll2, kLor2);
    CHECK(out.v[0] == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(out.v[1] == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(inner(out.v, out.v, kLor2) == doctest::Approx(0.0));
    CHECK(kEll2.form(out.x, out.v) == doctest::Approx(-1.0));

    const Ellipsoid circle(Vec{{1.0, 1.0}});
    const RayState back = reflect({Vec{{0.0, -1.0}}, Vec{{0.0, -1.0}}}, circle, Signature(2, 0));
    CHECK(back.v[1] == doctest::Approx(1.0));

    const double r = std::sqrt(2.0);
    const Ellipsoid round(Vec{{r, r}});
    const Vec x{{1.0, 1.0}};
    CHECK(kind_of([&] { reflect({x, Vec{{-1.0, 0.0}}}, round, kLor2); }) == ErrorKind::NullNormal);
}

TEST_CASE("billiard_map composes the worked steps") {
    const RayState r = billiard_map({Vec{{0.0, 1.0}}, Vec{{1.0, -1.0}}}, kEll2, kLor2);
    CHECK(r.x[0] == doctest::Approx(1.6));
    CHECK(r.x[1] == doctest::Approx(-0.6));
    CHECK(r.v[0] == doctest::Approx(5.0));
    CHECK(r.v[1] == doctest::Approx(5.0));
}

TEST_CASE("circle keeps the inscribed angle") {
    const Ellipsoid circle(Vec{{1.0, 1.0}});
    const Signature euc(2, 0);
    const double th = 0.3;
    RayState r{Vec{{0.0, -1.0}}, Vec{{std::sin(th), std::cos(th)}}};
    const double angle0 = std::abs(r.x.dot(r.v)) / r.v.norm();
    for (int i = 0; i < 20; ++i) {
        r = billiard_map(r, circle, euc);
        CHECK(std::abs(r.x.dot(r.v)) / r.v.norm() == doctest::Approx(angle0).epsilon(1e-12));
    }
}

TEST_CASE("Joachimsthal integral") {
    CHECK(joachimsthal({Vec{{0.0, 1.0}}, Vec{{1.0, -1.0}}}, kEll2) == doctest::Approx(-1.0));
    CHECK(joachimsthal({Vec{{1.6, -0.6}}, Vec{{5.0, 5.0}}}, kEll2) == doctest::Approx(-1.0));
    CHECK(joachimsthal({Vec{{0.0, 1.0}}, Vec{{0.0, -1.0}}}, Ellipsoid(Vec{{1.0, 1.0}})) == doctest::Approx(-1.0));
    // extended H is constant along the line
    const RayState r{Vec{{0.0, 1.0}}, Vec{{1.0, -1.0}}};
    const double h = joachimsthal_extended(r, kEll2);
    CHECK(joachimsthal_extended({r.x + 0.37 * r.v, r.v}, kEll2) == doctest::Approx(h));
    CHECK(std::isnan(joachimsthal_extended({Vec{{5.0, 5.0}}, Vec{{1.0, 0.0}}}, kEll2)));
}

TEST_CASE("integrals F_k") {
    const Vec x{{0.0, 1.0}};
    const Vec v{{1.0, -1.0}};
    CHECK(integral_F(0, x, v, kEll2, kLor2) == doctest::Approx(0.8));
    CHECK(integral_F(1, x, v, kEll2, kLor2) == doctest::Approx(-0.8));
    CHECK(integrals_F(x, v, kEll2, Signature(2, 0)).sum() == doctest::Approx(2.0));
    CHECK(kind_of([&] { integral_F(0, x, v, Ellipsoid(Vec{{1.0, 1.0}}), Signature(2, 0)); }) ==
          ErrorKind::ResonantAxes);

    // free flight leaves F unchanged for any t
    const Ellipsoid ell(Vec{{3.0, 2.0, 1.0}});
    const Signature sig(2, 1);
    const RayState r = sample_ray(ell, sig, LineType::Timelike, 4);
    const Vec f0 = integrals_F(r.x, r.v, ell, sig);
    for (double t : {-3.0, 0.1, 7.5}) {
        const Vec ft = integrals_F(r.x + t * r.v, r.v, ell, sig);
        CHECK((ft - f0).norm() <= 1e-12 * (1.0 + f0.norm()));
    }
}

TEST_CASE("run_orbit") {
    SUBCASE("circle conserves H") {
        const Signature euc(2, 0);
        OrbitOptions opts;
        opts.record_tangency = false;
        const ConfocalFamily table(Ellipsoid(Vec{{1.0, 1.0}}), euc);
        const OrbitRecord rec = run_orbit({Vec{{0.0, -1.0}}, Vec{{0.2, 1.0}}}, 100, table, opts);
        REQUIRE(rec.H.size() == 101);
        for (double h : rec.H) CHECK(h == doctest::Approx(rec.H[0]).epsilon(1e-12));
    }
    SUBCASE("planar null orbit is not periodic but lives on the oval image") {
        const ConfocalFamily fam(kEll2, kLor2);
        const OrbitRecord rec = run_orbit({Vec{{0.0, 1.0}}, Vec{{1.0, -1.0}}}, 4, fam);
        REQUIRE(rec.states.size() == 5);
        CHECK(rec.states[1].x[0] == doctest::Approx(1.6));
        CHECK(rec.states[2].x[0] == doctest::Approx(1.92));
        CHECK(rec.states[2].x[1] == doctest::Approx(-0.28));
        CHECK(rec.states[3].x[0] == doctest::Approx(0.704));
        CHECK(rec.states[3].x[1] == doctest::Approx(0.936));
    }
    SUBCASE("failures stop the run and are recorded") {
        // aim at a boundary point of x^2/2 + y^2 = 1 whose normal is null
        const Ellipsoid ell(Vec{{std::sqrt(2.0), 1.0}});
        const ConfocalFamily fam(ell, kLor2);
        const Vec start{{-std::sqrt(2.0), 0.0}};
        const Vec target{{2.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0)}};
        const OrbitRecord rec = run_orbit({start, target - start}, 10, fam);
        REQUIRE(rec.abort.has_value());
        CHECK(rec.abort->kind == ErrorKind::NullNormal);
        CHECK(rec.abort->at_bounce == 0);
        CHECK(rec.states.size() == 1);
    }
}

TEST_CASE("sampling") {
    const Ellipsoid ell(Vec{{3.0, 2.0, 1.0}});
    const Signature sig(2, 1);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const RayState r = sample_null_ray(ell, sig, seed);
        CHECK(std::abs(inner(r.v, r.v, sig)) <= 1e-12 * r.v.squaredNorm());
        CHECK(ell.form(r.x, r.v) < 0.0);
        CHECK(std::abs(ell.level(r.x)) <= 1e-12);
    }
    const RayState a = sample_null_ray(ell, sig, 9);
    const RayState b = sample_null_ray(ell, sig, 9);
    CHECK(a.x == b.x);
    CHECK(a.v == b.v);

    const RayState p = sample_null_ray(kEll2, kLor2, 3);
    CHECK(std::abs(std::abs(p.v[0]) - std::abs(p.v[1])) <= 1e-12 * p.v.norm());

    CHECK(classify_vector(sample_ray(ell, sig, LineType::Timelike, 1).v, sig) == LineType::Timelike);
    CHECK(kind_of([&] { sample_null_ray(ell, Signature(3, 0), 0); }) == ErrorKind::InvalidArgument);
}
