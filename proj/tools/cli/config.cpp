#include "config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "pebill/billiard.hpp"

namespace pebill::cli {

using nlohmann::json;

namespace {

// Walks one JSON object, remembering which keys were consumed so leftovers can
// be reported as unknown.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key);
    }

    const json& at(const std::string& key) { return j_.at(key); }
    std::string where(const std::string& key) const { return path_ + "." + key; }

    double number(const std::string& key, double fallback) {
        if (!has(key)) return fallback;
        const json& v = at(key);
        if (!v.is_number()) throw ConfigError(where(key) + ": expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw ConfigError(where(key) + ": must be finite");
        return d;
    }

    double positive(const std::string& key, double fallback) {
        const double d = number(key, fallback);
        if (!(d > 0.0)) throw ConfigError(where(key) + ": must be positive");
        return d;
    }

    template <class Int>
    Int integer(const std::string& key, Int fallback, Int min_value) {
        if (!has(key)) return fallback;
        const json& v = at(key);
        if (!v.is_number_integer()) throw ConfigError(where(key) + ": expected an integer");
        if (v.is_number_unsigned()) {
            const auto u = v.get<std::uint64_t>();
            if (u < static_cast<std::uint64_t>(min_value)) {
                throw ConfigError(where(key) + ": must be at least " + std::to_string(min_value));
            }
            return static_cast<Int>(u);
        }
        const auto i = v.get<std::int64_t>();
        if (i < static_cast<std::int64_t>(min_value)) {
            throw ConfigError(where(key) + ": must be at least " + std::to_string(min_value));
        }
        return static_cast<Int>(i);
    }

    bool boolean(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        if (!at(key).is_boolean()) throw ConfigError(where(key) + ": expected true or false");
        return at(key).get<bool>();
    }

    std::string string(const std::string& key, const std::string& fallback) {
        if (!has(key)) return fallback;
        if (!at(key).is_string()) throw ConfigError(where(key) + ": expected a string");
        return at(key).get<std::string>();
    }

    std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback) {
        if (!has(key)) return fallback;
        const json& v = at(key);
        if (!v.is_array()) throw ConfigError(where(key) + ": expected an array of numbers");
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number()) throw ConfigError(where(key) + ": expected an array of numbers");
            out.push_back(e.get<double>());
            if (!std::isfinite(out.back())) throw ConfigError(where(key) + ": entries must be finite");
        }
        return out;
    }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!seen_.contains(key)) throw ConfigError(path_ + ": unknown key '" + key + "'");
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void require_one_of(const std::string& value, std::initializer_list<const char*> allowed, const std::string& where) {
    for (const char* a : allowed) {
        if (value == a) return;
    }
    std::string list;
    for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
    throw ConfigError(where + ": '" + value + "' is not one of " + list);
}

InitialCondition parse_initial(const json& j, const std::string& path) {
    ObjectReader r(j, path);
    InitialCondition ic;
    ic.mode = r.string("mode", ic.mode);
    require_one_of(ic.mode, {"sample", "explicit"}, r.where("mode"));
    ic.type = r.string("type", ic.type);
    require_one_of(ic.type, {"spacelike", "timelike", "lightlike"}, r.where("type"));
    ic.x = r.numbers("x", ic.x);
    ic.v = r.numbers("v", ic.v);
    if (ic.mode == "explicit" && (ic.x.empty() || ic.v.empty())) {
        throw ConfigError(path + ": explicit initial condition needs both x and v");
    }
    r.finish();
    return ic;
}

ToleranceConfig parse_tolerances(const json& j, const std::string& path) {
    ObjectReader r(j, path);
    ToleranceConfig t;
    t.boundary = r.positive("boundary", t.boundary);
    t.lightlike = r.positive("lightlike", t.lightlike);
    t.null_normal = r.positive("null_normal", t.null_normal);
    t.grazing = r.positive("grazing", t.grazing);
    t.drift = r.positive("drift", t.drift);
    t.bracket = r.positive("bracket", t.bracket);
    t.gradient = r.positive("gradient", t.gradient);
    t.lambda = r.positive("lambda", t.lambda);
    t.oval = r.positive("oval", t.oval);
    t.stability = r.positive("stability", t.stability);
    r.finish();
    return t;
}

CurveConfig parse_curve(const json& j, const std::string& path) {
    ObjectReader r(j, path);
    CurveConfig c;
    c.kind = r.string("kind", c.kind);
    require_one_of(c.kind, {"ellipse", "circle", "null_chart_image", "table"}, r.where("kind"));
    c.axes = r.numbers("axes", c.axes);
    c.radius = r.positive("radius", c.radius);
    c.polygon = r.string("polygon", c.polygon);
    if (c.axes.size() != 2 || !(c.axes[0] > 0.0) || !(c.axes[1] > 0.0)) {
        throw ConfigError(r.where("axes") + ": need two positive semi-axes");
    }
    if (c.kind == "table" && c.polygon.empty()) throw ConfigError(r.where("polygon") + ": required for a table");
    r.finish();
    return c;
}

OvalConfig parse_oval(const json& j, const std::string& path) {
    ObjectReader r(j, path);
    OvalConfig o;
    if (r.has("curve")) o.curve = parse_curve(r.at("curve"), r.where("curve"));
    const auto start = r.numbers("start", {o.start[0], o.start[1]});
    if (start.size() != 2) throw ConfigError(r.where("start") + ": need a 2D point");
    o.start = {start[0], start[1]};
    o.steps = r.integer<int>("steps", o.steps, 1);
    o.half_period = r.integer<int>("half_period", o.half_period, 2);
    o.polygon = r.string("polygon", o.polygon);
    o.periods = r.integer<int>("periods", o.periods, 1);
    r.finish();
    return o;
}

CommuteConfig parse_commute(const json& j, const std::string& path) {
    ObjectReader r(j, path);
    CommuteConfig c;
    c.samples = r.integer<std::size_t>("samples", c.samples, 1);
    c.gradient_samples = r.integer<std::size_t>("gradient_samples", c.gradient_samples, 1);
    c.wrong_sign_adapter = r.boolean("wrong_sign_adapter", c.wrong_sign_adapter);
    c.workers = r.integer<unsigned>("workers", c.workers, 0);
    r.finish();
    return c;
}

FamilyPlotConfig parse_family_plot(const json& j, const std::string& path) {
    ObjectReader r(j, path);
    FamilyPlotConfig f;
    f.lambdas = r.numbers("lambdas", f.lambdas);
    if (f.lambdas.empty()) throw ConfigError(r.where("lambdas") + ": need at least one value");
    f.samples = r.integer<int>("samples", f.samples, 8);
    f.extent = r.number("extent", f.extent);
    if (f.extent < 0.0) throw ConfigError(r.where("extent") + ": must be non-negative");
    r.finish();
    return f;
}

}  // namespace

RunConfig parse_config(const json& j) {
    ObjectReader r(j, "config");
    RunConfig cfg;
    if (r.has("signature")) {
        const json& s = r.at("signature");
        if (!s.is_array() || s.size() != 2 || !s[0].is_number_integer() || !s[1].is_number_integer()) {
            throw ConfigError("config.signature: expected [p, q]");
        }
        cfg.signature = {s[0].get<int>(), s[1].get<int>()};
        if (cfg.signature[0] < 0 || cfg.signature[1] < 0 || cfg.signature[0] + cfg.signature[1] < 2) {
            throw ConfigError("config.signature: need p, q >= 0 and p + q >= 2");
        }
    }
    cfg.axes = r.numbers("axes", cfg.axes);
    for (double a : cfg.axes) {
        if (!(a > 0.0)) throw ConfigError("config.axes: semi-axes must be positive");
    }
    if (r.has("initial")) cfg.initial = parse_initial(r.at("initial"), "config.initial");
    cfg.bounces = r.integer<std::size_t>("bounces", cfg.bounces, 1);
    cfg.seed = r.integer<std::uint64_t>("seed", cfg.seed, 0);
    cfg.record_tangency = r.boolean("record_tangency", cfg.record_tangency);
    if (r.has("tolerances")) cfg.tolerances = parse_tolerances(r.at("tolerances"), "config.tolerances");
    cfg.output = r.string("output", cfg.output);
    if (r.has("commute")) cfg.commute = parse_commute(r.at("commute"), "config.commute");
    if (r.has("oval")) cfg.oval = parse_oval(r.at("oval"), "config.oval");
    if (r.has("family_plot")) cfg.family_plot = parse_family_plot(r.at("family_plot"), "config.family_plot");
    r.finish();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return parse_config(j);
}

json to_json(const RunConfig& cfg) {
    const auto& t = cfg.tolerances;
    const auto& o = cfg.oval;
    json initial = {{"mode", cfg.initial.mode}, {"type", cfg.initial.type}};
    if (!cfg.initial.x.empty()) initial["x"] = cfg.initial.x;
    if (!cfg.initial.v.empty()) initial["v"] = cfg.initial.v;
    return {
        {"signature", {cfg.signature[0], cfg.signature[1]}},
        {"axes", cfg.axes},
        {"initial", initial},
        {"bounces", cfg.bounces},
        {"seed", cfg.seed},
        {"record_tangency", cfg.record_tangency},
        {"tolerances",
         {{"boundary", t.boundary},
          {"lightlike", t.lightlike},
          {"null_normal", t.null_normal},
          {"grazing", t.grazing},
          {"drift", t.drift},
          {"bracket", t.bracket},
          {"gradient", t.gradient},
          {"lambda", t.lambda},
          {"oval", t.oval},
          {"stability", t.stability}}},
        {"output", cfg.output},
        {"commute",
         {{"samples", cfg.commute.samples},
          {"gradient_samples", cfg.commute.gradient_samples},
          {"wrong_sign_adapter", cfg.commute.wrong_sign_adapter},
          {"workers", cfg.commute.workers}}},
        {"oval",
         {{"curve",
           {{"kind", o.curve.kind},
            {"axes", o.curve.axes},
            {"radius", o.curve.radius},
            {"polygon", o.curve.polygon}}},
          {"start", {o.start[0], o.start[1]}},
          {"steps", o.steps},
          {"half_period", o.half_period},
          {"polygon", o.polygon},
          {"periods", o.periods}}},
        {"family_plot",
         {{"lambdas", cfg.family_plot.lambdas},
          {"samples", cfg.family_plot.samples},
          {"extent", cfg.family_plot.extent}}},
    };
}

void validate_geometry(const RunConfig& cfg) {
    const Signature sig(cfg.signature[0], cfg.signature[1]);
    if (cfg.axes.size() != sig.dim()) {
        throw ConfigError("config.axes has " + std::to_string(cfg.axes.size()) + " entries but the signature needs " +
                          std::to_string(sig.dim()));
    }
    const Ellipsoid ell(Eigen::Map<const Vec>(cfg.axes.data(), static_cast<Eigen::Index>(cfg.axes.size())));
    check_nonresonant(ell, sig);
    if (cfg.initial.mode == "explicit") {
        if (cfg.initial.x.size() != sig.dim() || cfg.initial.v.size() != sig.dim()) {
            throw ConfigError("config.initial: x and v must have " + std::to_string(sig.dim()) + " entries");
        }
        const RayState r{Eigen::Map<const Vec>(cfg.initial.x.data(), static_cast<Eigen::Index>(sig.dim())),
                         Eigen::Map<const Vec>(cfg.initial.v.data(), static_cast<Eigen::Index>(sig.dim()))};
        const double level = ell.level(r.x);
        if (!(std::abs(level) <= cfg.tolerances.boundary)) {
            throw ConfigError("config.initial.x is not on the ellipsoid (|Ax.x - 1| = " +
                              std::to_string(std::abs(level)) + ")");
        }
        if (!(ell.form(r.x, r.v) < 0.0)) throw ConfigError("config.initial.v does not point inward (Ax.v >= 0)");
    }
}

}  // namespace pebill::cli
