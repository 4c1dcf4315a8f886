// Acceptance suite: one PASS/FAIL line per criterion. `--only N` runs a single
// criterion (ctest registers each separately); without it all eleven run and
// the exit status is nonzero if any failed.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <random>
#include <unistd.h>
#include <sstream>
#include <string>
#include <vector>

#include "pebill/billiard.hpp"
#include "pebill/confocal.hpp"
#include "pebill/lorentz_oval.hpp"
#include "pebill/verify.hpp"

using namespace pebill;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string sci(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

const Ellipsoid kEll3(Vec{{3.0, 2.0, 1.0}});
const Signature kSig21(2, 1);

Ellipsoid generic_axes(std::size_t n) {
    Vec a(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) a[static_cast<Eigen::Index>(i)] = static_cast<double>(n - i) + 0.1 * i;
    return Ellipsoid(a);
}

// ---------------------------------------------------------------------------

Outcome sum_rule() {
    Stopwatch sw;
    double worst = 0.0;
    for (const auto& [p, q] : std::vector<std::pair<int, int>>{{1, 1}, {2, 1}, {3, 1}, {2, 2}}) {
        const Signature sig(p, q);
        worst = std::max(worst, sum_rule_check(generic_axes(sig.dim()), sig, 100000, 1));
    }
    const double t = sw.seconds();
    return {worst <= 1e-12 && t < 5.0,
            "max relative |sum F_k - <v,v>| = " + sci(worst) + " (<= 1e-12) over 4 signatures x 1e5 samples, " +
                sci(t) + " s (< 5 s)"};
}

Outcome commutation() {
    Stopwatch sw;
    double worst = 0.0;
    double grad = 0.0;
    for (const auto& [p, q] : std::vector<std::pair<int, int>>{{1, 1}, {2, 1}, {1, 2}, {3, 1}, {2, 2}}) {
        const Signature sig(p, q);
        const Ellipsoid ell = generic_axes(sig.dim());
        for (const auto& r : commutation_sweep(ell, sig, 10000, 2)) worst = std::max(worst, r.max_normalized);
        grad = std::max(grad, gradient_check(ell, sig, 1000, 3));
    }
    const double t = sw.seconds();
    // negative control: the sweep must see a metric sign slip
    SweepOptions wrong;
    wrong.wrong_sign_adapter = true;
    double control = 0.0;
    for (const auto& r : commutation_sweep(kEll3, kSig21, 200, 2, wrong)) control = std::max(control, r.max_normalized);
    return {worst <= 1e-10 && grad <= 1e-6 && t < 10.0 && control > 1e-3,
            "max normalized bracket = " + sci(worst) + " (<= 1e-10), gradient gate = " + sci(grad) +
                " (<= 1e-6), wrong-sign control = " + sci(control) + ", " + sci(t) + " s (< 10 s)"};
}

struct NullOrbit {
    OrbitRecord orbit;
    double seconds;
};

const NullOrbit& null_orbit() {
    static const NullOrbit cached = [] {
        Stopwatch sw;
        OrbitOptions opts;
        opts.record_tangency = false;
        const ConfocalFamily fam(kEll3, kSig21);
        OrbitRecord orbit = run_orbit(sample_null_ray(kEll3, kSig21, 0), 10000, fam, opts);
        return NullOrbit{std::move(orbit), sw.seconds()};
    }();
    return cached;
}

Outcome h_invariance() {
    const auto& [orbit, t] = null_orbit();
    if (orbit.abort) return {false, "orbit aborted: " + orbit.abort->message};
    const DriftReport d = drift_report(orbit);
    double norm_err = 0.0;
    double pair_err = 0.0;
    for (std::size_t b = 0; b + 1 < orbit.states.size(); ++b) {
        const Vec& v = orbit.states[b].v;
        const Vec& y = orbit.states[b + 1].x;
        const Vec& u = orbit.states[b + 1].v;
        norm_err = std::max(norm_err, std::abs(inner(u, u, kSig21) - inner(v, v, kSig21)) /
                                          (u.squaredNorm() + v.squaredNorm()));
        const Vec ay = kEll3.apply(y);
        pair_err = std::max(pair_err, std::abs(ay.dot(u) + ay.dot(v)) / (ay.norm() * (u.norm() + v.norm())));
    }
    return {d.H <= 1e-9 && norm_err <= 1e-12 && pair_err <= 1e-12 && t < 5.0,
            "10^4 bounces, seed 0: max relative H drift = " + sci(d.H) + " (<= 1e-9), |<u,u>-<v,v>| = " +
                sci(norm_err) + ", |Ax.u+Ax.v| = " + sci(pair_err) + " (<= 1e-12, relative), " + sci(t) +
                " s (< 5 s)"};
}

Outcome f_conservation() {
    const auto& orbit = null_orbit().orbit;
    if (orbit.abort) return {false, "orbit aborted: " + orbit.abort->message};
    const DriftReport d = drift_report(orbit);
    std::string list;
    double worst = 0.0;
    for (std::size_t k = 0; k < d.F.size(); ++k) {
        worst = std::max(worst, d.F[k]);
        list += (k ? ", " : "") + sci(d.F[k]) + " @" + std::to_string(d.F_worst_bounce[k]);
    }
    return {worst <= 1e-9, "max relative F_k drift = [" + list + "] (<= 1e-9)"};
}

Outcome tangency() {
    Stopwatch sw;
    const ConfocalFamily fam(kEll3, kSig21);
    int bad = 0;
    for (LineType type : {LineType::Lightlike, LineType::Spacelike, LineType::Timelike}) {
        const std::size_t expected = type == LineType::Lightlike ? 1 : 2;
        for (std::uint64_t s = 0; s < 100; ++s) {
            if (tangency_parameters(fam, sample_ray(kEll3, kSig21, type, 1000 + s)).size() != expected) ++bad;
        }
    }
    const OrbitRecord orbit = run_orbit(sample_null_ray(kEll3, kSig21, 0), 100, fam);
    const DriftReport d = drift_report(orbit);
    const double lam = d.lambda.empty() ? INFINITY : d.lambda[0];
    const double t = sw.seconds();
    return {bad == 0 && !orbit.abort && lam <= 1e-8 && !d.lambda_mismatch && t < 30.0,
            "wrong counts on " + std::to_string(bad) + "/300 chords (1 light-like, 2 otherwise); 100-bounce null orbit "
                "lambda drift = " + sci(lam) + " (<= 1e-8), " + sci(t) + " s (< 30 s)"};
}

Outcome euclidean() {
    const Signature sig(3, 0);
    const ConfocalFamily fam(kEll3, sig);
    int bad = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        if (tangency_parameters(fam, sample_ray(kEll3, sig, LineType::Spacelike, 2000 + s)).size() != 2) ++bad;
    }
    const OrbitRecord orbit = run_orbit(sample_ray(kEll3, sig, LineType::Spacelike, 0), 1000, fam);
    const DriftReport d = drift_report(orbit);
    double lam = 0.0;
    for (double l : d.lambda) lam = std::max(lam, l);
    return {bad == 0 && !orbit.abort && d.lambda.size() == 2 && lam <= 1e-9,
            "sig (3,0): wrong counts on " + std::to_string(bad) + "/100 lines; 10^3-bounce orbit lambda drift = " +
                sci(lam) + " (<= 1e-9), H drift = " + sci(d.H)};
}

Outcome four_periodicity() {
    const OvalCurve ellipse = OvalCurve::ellipse(2.0, 1.0);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
    double closure = 0.0;
    double v_err = 0.0;
    int sampled = 0;
    int degenerate = 0;
    while (sampled < 1000) {
        const double s = angle(rng);
        try {
            const double back = oval_map_power(ellipse, s, 2);
            closure = std::max(closure, (ellipse.point(back) - ellipse.point(s)).norm());
            v_err = std::max(v_err, std::abs(acceleration_factor(polygon_from_parameter(ellipse, 2, s)) - 1.0));
            ++sampled;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::DegenerateChord) throw;
            ++degenerate;
        }
    }
    return {closure <= 1e-10 && v_err <= 1e-12,
            "ellipse (2,1): oval_map^2 closure = " + sci(closure) + " (<= 1e-10), |v - 1| = " + sci(v_err) +
                " (<= 1e-12) at 1000 points (" + std::to_string(degenerate) + " extremal draws skipped)"};
}

const std::vector<Point2> kSquare{{1, 1}, {-1, 1}, {-1, -1}, {1, -1}};

NullPolygon polygon_on(const OvalCurve& c) {
    NullPolygon poly;
    poly.points = kSquare;
    for (const auto& p : kSquare) {
        poly.params.push_back(c.parameter_of(p));
        poly.slopes.push_back(c.slope(poly.params.back()));
    }
    return poly;
}

Outcome acceleration() {
    const std::vector<double> slopes{-1, 2, -1, 2};
    const OvalCurve table = build_accelerating_table(kSquare, slopes);
    const NullPolygon poly = polygon_on(table);
    const double v = acceleration_factor(poly);
    const double one = simulate_speed(table, poly, 1);
    const double five = simulate_speed(table, poly, 5);
    const double per_period = std::abs(one - v) / std::abs(v);
    const double after = std::abs(five - 1024.0) / 1024.0;
    return {std::abs(v - 4.0) <= 1e-8 && per_period <= 1e-8 && after <= 1e-6,
            "formula v = " + sci(v) + ", simulated per period = " + sci(one) + " (rel diff " + sci(per_period) +
                " <= 1e-8), after 5 periods = " + sci(five) + " (rel err vs 1024 " + sci(after) + " <= 1e-6)"};
}

Outcome stability() {
    bool ok = true;
    std::ostringstream detail;
    for (double s : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        const std::vector<double> slopes{-1, 1 + s, -1, 1 + s};
        const OvalCurve table = build_accelerating_table(kSquare, slopes);
        const NullPolygon poly = find_periodic_orbit(table, 2, table.parameter_of(kSquare[0]));
        const double v = std::abs(acceleration_factor(poly));
        const double d = std::abs(return_map_derivative(table, poly));
        const bool dichotomy = (std::abs(d - 1.0) <= 1e-6) == (std::abs(v - 1.0) <= 1e-6);
        const bool pair = std::abs(d - v) <= 1e-6 * v || std::abs(d - 1.0 / v) <= 1e-6 / v;
        ok = ok && dichotomy && pair;
        detail << (s == 0.0 ? "" : "; ") << "s=" << s << ": |v|=" << sci(v) << " |D|=" << sci(d);
    }
    return {ok, detail.str() + " (|D|=1 <=> v=1 and |D| in {v,1/v}, 1e-6)"};
}

Outcome cross_chart() {
    const Ellipsoid ell(Vec{{2.0, 1.0}});
    const Signature sig(1, 1);
    RayState r{Vec{{0.0, 1.0}}, Vec{{1.0, -1.0}}};
    const OvalCurve image = null_chart_image(2.0, 1.0);
    double s = image.parameter_of(to_null_chart(Point2(0.0, 1.0)));
    // v = (1,-1) is (0, sqrt2) in the null chart: the first chord is vertical
    ChordDirection dir = ChordDirection::Vertical;
    double worst = 0.0;
    for (int b = 0; b < 100; ++b) {
        r = billiard_map(r, ell, sig);
        s = chord_step(image, s, dir);
        dir = dir == ChordDirection::Vertical ? ChordDirection::Horizontal : ChordDirection::Vertical;
        const Point2 back = from_null_chart(image.point(s));
        worst = std::max(worst, (back - Point2(r.x[0], r.x[1])).norm());
    }
    return {worst <= 1e-9, "ellipse (2,1), 100 bounces from (0,1) along (1,-1): max point distance = " + sci(worst) +
                               " (<= 1e-9)"};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome cli_determinism() {
    const fs::path work = fs::temp_directory_path() / ("pebill_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(work);
    {
        std::ofstream(work / "v4.json") << R"({"points": [[1, 1], [-1, 1], [-1, -1], [1, -1]], "slopes": [-1, 2, -1, 2]})";
        std::ofstream(work / "sim.json") << R"({"signature": [2, 1], "axes": [3, 2, 1], "bounces": 100, "seed": 3})";
        std::ofstream(work / "synth.json") << R"({"oval": {"polygon": ")" + (work / "v4.json").string() +
                                                  R"(", "periods": 5}})";
    }
    const std::string cli = PEBILL_CLI_PATH;
    auto run = [&](const std::string& args, const std::string& out) {
        const std::string cmd = "\"" + cli + "\" " + args + " --out \"" + (work / out).string() + "\" > /dev/null 2>&1";
        return std::system(cmd.c_str());
    };
    const std::string sim = "simulate --seed 3 --config \"" + (work / "sim.json").string() + "\"";
    const std::string syn = "oval synth --config \"" + (work / "synth.json").string() + "\"";
    const int rc = run(sim, "a") | run(sim, "b") | run(syn, "a") | run(syn, "b");
    bool same = true;
    std::size_t files = 0;
    for (const char* f : {"orbit.csv", "summary.json", "synth.json", "table.csv"}) {
        const std::string a = slurp(work / "a" / f);
        same = same && !a.empty() && a == slurp(work / "b" / f);
        ++files;
    }
    fs::remove_all(work);
    return {rc == 0 && same, std::to_string(files) + " artifacts of simulate and oval synth " +
                                 (same ? "byte-identical" : "DIFFER") + " across two runs (exit codes " +
                                 (rc == 0 ? "0" : "nonzero") + ")"};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"sum rule", sum_rule},
        {"commutation", commutation},
        {"H invariance", h_invariance},
        {"F_k conservation", f_conservation},
        {"tangency counts and invariance", tangency},
        {"Euclidean degeneration", euclidean},
        {"planar 4-periodicity", four_periodicity},
        {"acceleration", acceleration},
        {"stability dichotomy", stability},
        {"cross-chart consistency", cross_chart},
        {"CLI determinism", cli_determinism},
    };
    int only = 0;
    if (argc == 3 && std::string(argv[1]) == "--only") only = std::atoi(argv[2]);

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int number = static_cast<int>(i) + 1;
        if (only != 0 && only != number) continue;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << number << ". " << criteria[i].first << ": " << o.detail
                  << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
