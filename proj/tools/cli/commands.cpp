#include "commands.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "pebill/billiard.hpp"
#include "pebill/confocal.hpp"
#include "pebill/verify.hpp"

namespace pebill::cli {

using nlohmann::json;
namespace fs = std::filesystem;

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

namespace {

Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

// Binary mode so that line endings stay LF on every platform.
std::ofstream open_output(const RunConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.output);
    const fs::path path = fs::path(cfg.output) / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    return out;
}

void write_json(const RunConfig& cfg, const std::string& name, const json& j) {
    auto out = open_output(cfg, name);
    out << j.dump(2) << '\n';
}

class CsvWriter {
public:
    explicit CsvWriter(std::ofstream out) : out_(std::move(out)) {}

    CsvWriter& cell(const std::string& s) {
        if (!first_) out_ << ',';
        out_ << s;
        first_ = false;
        return *this;
    }
    CsvWriter& cell(double x) { return cell(format_double(x)); }
    CsvWriter& cell(std::size_t i) { return cell(std::to_string(i)); }
    CsvWriter& cell(int i) { return cell(std::to_string(i)); }
    void end() {
        out_ << '\n';
        first_ = true;
    }

private:
    std::ofstream out_;
    bool first_ = true;
};

LineType parse_line_type(const std::string& s) {
    if (s == "spacelike") return LineType::Spacelike;
    if (s == "timelike") return LineType::Timelike;
    return LineType::Lightlike;
}

json abort_json(const std::optional<OrbitAbort>& abort) {
    if (!abort) return nullptr;
    return {{"kind", std::string(to_string(abort->kind))}, {"message", abort->message}, {"at_bounce", abort->at_bounce}};
}

}  // namespace

PolygonFile load_polygon(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open polygon file " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError(path + ": expected an object with points and slopes");
    for (const auto& [key, value] : j.items()) {
        if (key != "points" && key != "slopes") throw ConfigError(path + ": unknown key '" + key + "'");
    }
    PolygonFile poly;
    try {
        for (const auto& p : j.at("points")) {
            if (p.size() != 2) throw ConfigError(path + ": points must be [x, y] pairs");
            poly.points.emplace_back(p[0].get<double>(), p[1].get<double>());
        }
        for (const auto& t : j.at("slopes")) poly.slopes.push_back(t.get<double>());
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    if (poly.points.size() != poly.slopes.size() || poly.points.size() < 4 || poly.points.size() % 2 != 0) {
        throw ConfigError(path + ": need an even number (>= 4) of points and one slope per point");
    }
    return poly;
}

// ---------------------------------------------------------------------------
// simulate

int cmd_simulate(const RunConfig& cfg) {
    validate_geometry(cfg);
    const Signature sig(cfg.signature[0], cfg.signature[1]);
    const Ellipsoid ell(to_vec(cfg.axes));
    const ConfocalFamily fam(ell, sig);

    RayState start = cfg.initial.mode == "explicit"
                         ? RayState{to_vec(cfg.initial.x), to_vec(cfg.initial.v)}
                         : sample_ray(ell, sig, parse_line_type(cfg.initial.type), cfg.seed);
    const LineType type = classify_vector(start.v, sig, cfg.tolerances.lightlike);

    OrbitOptions opts;
    opts.tol = cfg.tolerances.core();
    opts.record_tangency = cfg.record_tangency;
    const OrbitRecord orbit = run_orbit(start, cfg.bounces, fam, opts);

    const std::size_t n = sig.dim();
    const std::size_t n_lambda = cfg.record_tangency ? (type == LineType::Lightlike ? n - 2 : n - 1) : 0;
    CsvWriter csv(open_output(cfg, "orbit.csv"));
    csv.cell("index");
    for (std::size_t i = 1; i <= n; ++i) csv.cell("x" + std::to_string(i));
    for (std::size_t i = 1; i <= n; ++i) csv.cell("v" + std::to_string(i));
    csv.cell("H");
    for (std::size_t i = 1; i <= n; ++i) csv.cell("F" + std::to_string(i));
    for (std::size_t i = 1; i <= n_lambda; ++i) csv.cell("lambda" + std::to_string(i));
    csv.end();
    for (std::size_t b = 0; b < orbit.states.size(); ++b) {
        const auto& s = orbit.states[b];
        csv.cell(b);
        for (Eigen::Index i = 0; i < s.x.size(); ++i) csv.cell(s.x[i]);
        for (Eigen::Index i = 0; i < s.v.size(); ++i) csv.cell(s.v[i]);
        csv.cell(orbit.H[b]);
        for (Eigen::Index i = 0; i < orbit.F[b].size(); ++i) csv.cell(orbit.F[b][i]);
        if (n_lambda > 0) {
            const auto lambdas = orbit.tangency[b].lambdas();
            for (std::size_t i = 0; i < n_lambda; ++i) {
                if (i < lambdas.size()) csv.cell(lambdas[i]);
                else csv.cell(std::string());
            }
        }
        csv.end();
    }

    json summary = {
        {"command", "simulate"},
        {"signature", {cfg.signature[0], cfg.signature[1]}},
        {"axes", cfg.axes},
        {"seed", cfg.seed},
        {"line_type", std::string(to_string(type))},
        {"initial", {{"x", to_std(start.x)}, {"v", to_std(start.v)}}},
        {"bounces_requested", cfg.bounces},
        {"bounces_completed", orbit.bounce_count()},
        {"abort", abort_json(orbit.abort)},
    };
    bool quarantined = orbit.abort.has_value();
    bool within = true;
    try {
        const DriftReport d = drift_report(orbit, {cfg.tolerances.lambda});
        double max_hf = d.H;
        for (double f : d.F) max_hf = std::max(max_hf, f);
        double max_lambda = 0.0;
        for (double l : d.lambda) max_lambda = std::max(max_lambda, l);
        within = max_hf <= cfg.tolerances.drift && max_lambda <= cfg.tolerances.lambda && !d.lambda_mismatch;
        summary["drift"] = {
            {"H", d.H},
            {"H_worst_bounce", d.H_worst_bounce},
            {"F", d.F},
            {"F_worst_bounce", d.F_worst_bounce},
            {"lambda", d.lambda},
            {"lambda_worst_bounce", d.lambda_worst_bounce},
            {"lambda_mismatch", d.lambda_mismatch},
            {"max", d.max_drift()},
        };
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::TangencyCountChanged) throw;
        quarantined = true;
        summary["drift"] = nullptr;
        summary["quarantine_reason"] = e.what();
    }
    summary["drift_tolerance"] = cfg.tolerances.drift;
    summary["lambda_tolerance"] = cfg.tolerances.lambda;
    summary["quarantined"] = quarantined;
    summary["drift_within_tolerance"] = within;
    write_json(cfg, "summary.json", summary);

    if (quarantined) {
        std::cerr << "simulate: orbit quarantined after " << orbit.bounce_count() << " bounces";
        if (orbit.abort) std::cerr << " (" << orbit.abort->message << ")";
        std::cerr << "\n";
        return Quarantine;
    }
    if (!within) {
        std::cerr << "simulate: invariant drift exceeds tolerance\n";
        return ToleranceFailure;
    }
    return Clean;
}

// ---------------------------------------------------------------------------
// commute

int cmd_commute(const RunConfig& cfg) {
    validate_geometry(cfg);
    const Signature sig(cfg.signature[0], cfg.signature[1]);
    const Ellipsoid ell(to_vec(cfg.axes));

    SweepOptions opts;
    opts.wrong_sign_adapter = cfg.commute.wrong_sign_adapter;
    opts.workers = cfg.commute.workers;
    const auto reports = commutation_sweep(ell, sig, cfg.commute.samples, cfg.seed, opts);
    const double grad = gradient_check(ell, sig, cfg.commute.gradient_samples, cfg.seed);

    json arr = json::array();
    bool pass = grad <= cfg.tolerances.gradient;
    for (const auto& r : reports) {
        const bool ok = r.max_normalized <= cfg.tolerances.bracket;
        pass = pass && ok;
        arr.push_back({{"j", r.j + 1},
                       {"k", r.k + 1},
                       {"samples", r.samples},
                       {"max_normalized", r.max_normalized},
                       {"worst_x", to_std(r.worst_x)},
                       {"worst_p", to_std(r.worst_p)},
                       {"pass", ok}});
    }
    write_json(cfg, "brackets.json", arr);
    write_json(cfg, "commute_summary.json",
               {{"command", "commute"},
                {"signature", {cfg.signature[0], cfg.signature[1]}},
                {"axes", cfg.axes},
                {"seed", cfg.seed},
                {"wrong_sign_adapter", cfg.commute.wrong_sign_adapter},
                {"gradient_check", grad},
                {"gradient_tolerance", cfg.tolerances.gradient},
                {"bracket_tolerance", cfg.tolerances.bracket},
                {"pass", pass}});
    if (!pass) {
        std::cerr << "commute: brackets or gradients exceed tolerance\n";
        return ToleranceFailure;
    }
    return Clean;
}

// ---------------------------------------------------------------------------
// oval

namespace {

OvalCurve make_curve(const CurveConfig& c) {
    if (c.kind == "ellipse") return OvalCurve::ellipse(c.axes[0], c.axes[1]);
    if (c.kind == "circle") return OvalCurve::circle(c.radius);
    if (c.kind == "null_chart_image") return null_chart_image(c.axes[0], c.axes[1]);
    const PolygonFile poly = load_polygon(c.polygon);
    return build_accelerating_table(poly.points, poly.slopes);
}

json polygon_json(const NullPolygon& poly) {
    json points = json::array();
    for (const auto& p : poly.points) points.push_back({p.x(), p.y()});
    return {{"points", points}, {"params", poly.params}, {"slopes", poly.slopes}};
}

int oval_iterate(const RunConfig& cfg, const OvalCurve& curve) {
    CsvWriter csv(open_output(cfg, "oval_iterate.csv"));
    csv.cell("step").cell("s").cell("x").cell("y");
    csv.end();
    double s = curve.parameter_of(Point2(cfg.oval.start[0], cfg.oval.start[1]));
    auto row = [&](int k) {
        const Point2 p = curve.point(s);
        csv.cell(k).cell(s).cell(p.x()).cell(p.y());
        csv.end();
    };
    row(0);
    for (int k = 1; k <= cfg.oval.steps; ++k) {
        try {
            s = oval_map(curve, s);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::DegenerateChord) throw;
            std::cerr << "oval iterate: stopped at step " << k << ": " << e.what() << "\n";
            return Quarantine;
        }
        row(k);
    }
    return Clean;
}

int oval_periodic(const RunConfig& cfg, const OvalCurve& curve) {
    const double seed = curve.parameter_of(Point2(cfg.oval.start[0], cfg.oval.start[1]));
    const NullPolygon poly = find_periodic_orbit(curve, cfg.oval.half_period, seed);
    const double v = acceleration_factor(poly);
    const double d = return_map_derivative(curve, poly);
    const double residual = std::abs(angle_difference(oval_map_power(curve, poly.params.back(), cfg.oval.half_period),
                                                      poly.params.back()));
    const double av = std::abs(v);
    const double ad = std::abs(d);
    const double tol = cfg.tolerances.stability;
    const bool in_pair = std::abs(ad - av) <= tol * av || std::abs(ad - 1.0 / av) <= tol / av;
    const bool dichotomy = (std::abs(ad - 1.0) <= tol) == (std::abs(av - 1.0) <= tol);
    json j = polygon_json(poly);
    j["command"] = "oval periodic";
    j["half_period"] = cfg.oval.half_period;
    j["v"] = v;
    j["abs_v"] = av;
    j["D"] = d;
    j["abs_D"] = ad;
    j["closure_residual"] = residual;
    j["stable"] = std::abs(ad - 1.0) <= tol;
    j["D_in_v_or_inverse"] = in_pair;
    j["dichotomy_holds"] = dichotomy;
    write_json(cfg, "periodic.json", j);
    if (!in_pair || !dichotomy) {
        std::cerr << "oval periodic: stability dichotomy violated\n";
        return ToleranceFailure;
    }
    return Clean;
}

int oval_synth(const RunConfig& cfg) {
    if (cfg.oval.polygon.empty()) throw ConfigError("config.oval.polygon: required for synth");
    const PolygonFile input = load_polygon(cfg.oval.polygon);
    const OvalCurve table = build_accelerating_table(input.points, input.slopes);

    // closed loop: read the polygon back off the constructed curve
    NullPolygon target{input.points, {}, input.slopes};
    NullPolygon extracted;
    double point_error = 0.0;
    double slope_error = 0.0;
    for (std::size_t i = 0; i < input.points.size(); ++i) {
        const double th = table.parameter_of(input.points[i]);
        extracted.params.push_back(th);
        extracted.points.push_back(table.point(th));
        extracted.slopes.push_back(table.slope(th));
        point_error = std::max(point_error, (extracted.points.back() - input.points[i]).norm());
        slope_error = std::max(slope_error, std::abs(extracted.slopes.back() - input.slopes[i]) /
                                                std::max(1.0, std::abs(input.slopes[i])));
    }
    const double v_formula = acceleration_factor(target);
    const double v_extracted = acceleration_factor(extracted);
    const double v_simulated = simulate_speed(table, extracted, 1);
    const double speed_after = simulate_speed(table, extracted, cfg.oval.periods);
    const double tol = cfg.tolerances.oval;
    const bool agree = std::abs(v_simulated - v_formula) <= tol * std::abs(v_formula);
    const bool closed_loop = point_error <= tol && slope_error <= tol;

    json bumps = json::array();
    for (const auto& b : table.bumps()) {
        bumps.push_back({{"center", b.center}, {"half_width", b.half_width}, {"amplitude", b.amplitude}, {"tilt", b.tilt}});
    }
    const Matrix2& q = table.base_form();
    json j = {
        {"command", "oval synth"},
        {"curve",
         {{"center", {table.center().x(), table.center().y()}},
          {"base_form", {q(0, 0), q(0, 1), q(1, 1)}},
          {"bumps", bumps},
          {"min_curvature", table.min_curvature()}}},
        {"polygon", polygon_json(extracted)},
        {"v_formula", v_formula},
        {"abs_v_formula", std::abs(v_formula)},
        {"v_extracted_slopes", v_extracted},
        {"v_simulated", v_simulated},
        {"abs_v_simulated", std::abs(v_simulated)},
        {"periods", cfg.oval.periods},
        {"speed_after_periods", speed_after},
        {"closed_loop_point_error", point_error},
        {"closed_loop_slope_error", slope_error},
        {"tolerance", tol},
        {"pass", agree && closed_loop},
    };
    write_json(cfg, "synth.json", j);

    CsvWriter csv(open_output(cfg, "table.csv"));
    csv.cell("index").cell("theta").cell("x").cell("y");
    csv.end();
    constexpr int samples = 512;
    for (int k = 0; k < samples; ++k) {
        const double th = 2.0 * std::numbers::pi * k / samples;
        const Point2 p = table.point(th);
        csv.cell(k).cell(th).cell(p.x()).cell(p.y());
        csv.end();
    }
    if (!agree || !closed_loop) {
        std::cerr << "oval synth: constructed table misses the targets\n";
        return ToleranceFailure;
    }
    return Clean;
}

}  // namespace

int cmd_oval(const RunConfig& cfg, const std::string& mode) {
    if (mode == "synth") return oval_synth(cfg);
    const OvalCurve curve = make_curve(cfg.oval.curve);
    if (mode == "iterate") return oval_iterate(cfg, curve);
    if (mode == "periodic") return oval_periodic(cfg, curve);
    throw ConfigError("unknown oval mode '" + mode + "'");
}

// ---------------------------------------------------------------------------
// family-plot

int cmd_family_plot(const RunConfig& cfg) {
    validate_geometry(cfg);
    const Signature sig(cfg.signature[0], cfg.signature[1]);
    if (sig.dim() != 2) throw ConfigError("family-plot draws planar families; the signature must have p + q = 2");
    const Ellipsoid ell(to_vec(cfg.axes));
    const ConfocalFamily fam(ell, sig);
    const double extent = cfg.family_plot.extent > 0.0 ? cfg.family_plot.extent : 2.0 * ell.axes().maxCoeff();
    const int m = cfg.family_plot.samples;

    CsvWriter csv(open_output(cfg, "family.csv"));
    csv.cell("member").cell("lambda").cell("kind").cell("branch").cell("index").cell("x").cell("y");
    csv.end();
    auto warning = [&](std::size_t member, double lambda, const std::string& kind) {
        csv.cell(member).cell(lambda).cell(kind).cell(std::string()).cell(std::string()).cell(std::string()).cell(
            std::string());
        csv.end();
        std::cerr << "family-plot: member " << member << " (lambda = " << format_double(lambda) << ") skipped: " << kind
                  << "\n";
    };

    for (std::size_t k = 0; k < cfg.family_plot.lambdas.size(); ++k) {
        const double lambda = cfg.family_plot.lambdas[k];
        if (fam.near_pole(lambda)) {
            warning(k, lambda, "warning:pole");
            continue;
        }
        const double c1 = fam.coefficient(0, lambda);
        const double c2 = fam.coefficient(1, lambda);
        if (c1 < 0.0 && c2 < 0.0) {
            warning(k, lambda, "warning:empty");
            continue;
        }
        if (c1 > 0.0 && c2 > 0.0) {
            const double a = std::sqrt(c1);
            const double b = std::sqrt(c2);
            for (int i = 0; i <= m; ++i) {
                const double t = 2.0 * std::numbers::pi * i / m;
                csv.cell(k).cell(lambda).cell("ellipse").cell(0).cell(i).cell(a * std::cos(t)).cell(b * std::sin(t));
                csv.end();
            }
            continue;
        }
        // hyperbola: two branches around the axis with the positive coefficient,
        // parameterized by cosh/sinh and clipped to the plotting box
        const bool x_axis = c1 > 0.0;
        const double a = std::sqrt(std::abs(x_axis ? c1 : c2));
        const double b = std::sqrt(std::abs(x_axis ? c2 : c1));
        if (a >= extent) {
            warning(k, lambda, "warning:outside");
            continue;
        }
        const double u_max = std::acosh(extent / a);
        for (int branch = 0; branch < 2; ++branch) {
            const double sign = branch == 0 ? 1.0 : -1.0;
            for (int i = 0; i <= m; ++i) {
                const double u = -u_max + 2.0 * u_max * i / m;
                const double along = sign * a * std::cosh(u);
                const double across = b * std::sinh(u);
                const double x = x_axis ? along : across;
                const double y = x_axis ? across : along;
                csv.cell(k).cell(lambda).cell("hyperbola").cell(branch).cell(i).cell(x).cell(y);
                csv.end();
            }
        }
    }
    return Clean;
}

}  // namespace pebill::cli
