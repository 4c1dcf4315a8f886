#include <cmath>

#include "doctest.h"
#include "pebill/verify.hpp"

using namespace pebill;

namespace {
const Ellipsoid kEll3(Vec{{3.0, 2.0, 1.0}});
const Signature kSig21(2, 1);
}  // namespace

TEST_CASE("canonical brackets") {
    const Vec x{{0.3, -0.2, 0.5}};
    const Vec p{{1.0, 0.4, -0.7}};
    const auto x1 = coordinate_observable(0, false, 3);
    const auto p1 = coordinate_observable(0, true, 3);
    const auto p2 = coordinate_observable(1, true, 3);
    CHECK(poisson_bracket(x1, p1, x, p) == 1.0);
    CHECK(poisson_bracket(x1, p2, x, p) == 0.0);
    CHECK(poisson_bracket(p1, x1, x, p) == -1.0);
    CHECK(poisson_bracket(x1, p1, x, p, BracketMode::FiniteDifference) == doctest::Approx(1.0));

    const MetricAdapter adapter(kSig21);
    const auto f0 = integral_observable(0, kEll3, adapter);
    const auto f1 = integral_observable(1, kEll3, adapter);
    CHECK(poisson_bracket(f0, f0, x, p) == 0.0);
    CHECK(std::abs(poisson_bracket(f0, f1, x, p)) <= 1e-12);
}

TEST_CASE("finite differences agree with the analytic gradient") {
    const MetricAdapter adapter(kSig21);
    const auto f = integral_observable(2, kEll3, adapter);
    const auto [x, p] = random_phase_point(kEll3, 3, 17);
    const PhaseGradient exact = f.gradient(x, p);
    const PhaseGradient fd = finite_difference_gradient(f, x, p);
    CHECK((fd.dx - exact.dx).norm() <= 1e-6 * exact.dx.norm());
    CHECK((fd.dp - exact.dp).norm() <= 1e-6 * exact.dp.norm());
    CHECK(gradient_check(kEll3, kSig21, 200, 4) <= 1e-6);
}

TEST_CASE("commutation sweep") {
    const auto euclid = commutation_sweep(Ellipsoid(Vec{{2.0, 1.0}}), Signature(2, 0), 10000, 1);
    REQUIRE(euclid.size() == 1);
    CHECK(euclid[0].max_normalized <= 1e-10);

    const auto reports = commutation_sweep(kEll3, kSig21, 2000, 1);
    CHECK(reports.size() == 3);
    for (const auto& r : reports) {
        CHECK(r.max_normalized <= 1e-10);
        CHECK(r.samples == 2000);
    }
    SweepOptions wrong;
    wrong.wrong_sign_adapter = true;
    double worst = 0.0;
    for (const auto& r : commutation_sweep(kEll3, kSig21, 200, 1, wrong)) worst = std::max(worst, r.max_normalized);
    CHECK(worst > 1e-3);

    // results do not depend on the worker count
    SweepOptions one;
    one.workers = 1;
    const auto serial = commutation_sweep(kEll3, kSig21, 500, 9, one);
    const auto parallel = commutation_sweep(kEll3, kSig21, 500, 9);
    for (std::size_t i = 0; i < serial.size(); ++i) CHECK(serial[i].max_normalized == parallel[i].max_normalized);
}

TEST_CASE("sum rule") {
    CHECK(sum_rule_check(kEll3, kSig21, 5000, 2) <= 1e-12);
    CHECK(sum_rule_check(Ellipsoid(Vec{{2.0, 1.0}}), Signature(1, 1), 5000, 2) <= 1e-12);
}

TEST_CASE("free flight invariance") {
    const FreeFlightReport r = free_flight_invariance(kEll3, kSig21, 500, 6);
    CHECK(r.F_defect <= 1e-12);
    CHECK(r.H_defect <= 1e-10);
}

TEST_CASE("drift report") {
    const ConfocalFamily fam(kEll3, kSig21);
    const OrbitRecord orbit = run_orbit(sample_ray(kEll3, kSig21, LineType::Spacelike, 3), 200, fam);
    const DriftReport d = drift_report(orbit);
    CHECK(d.bounces == 200);
    CHECK(d.H <= 1e-10);
    CHECK(d.F.size() == 3);
    CHECK(d.lambda.size() == 2);
    CHECK(d.max_drift() <= 1e-8);

    // a tampered record must be caught
    OrbitRecord bad = orbit;
    bad.tangency[5].params.pop_back();
    CHECK_THROWS_AS(drift_report(bad), Error);
    bad = orbit;
    bad.H[7] *= 1.0 + 1e-6;
    const DriftReport dh = drift_report(bad);
    CHECK(dh.H == doctest::Approx(1e-6).epsilon(1e-3));
    CHECK(dh.H_worst_bounce == 7);
}
