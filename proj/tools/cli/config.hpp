#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "pebill/pecore.hpp"

namespace pebill::cli {

/// Raised for anything wrong with the configuration itself; maps to exit code 1.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct InitialCondition {
    std::string mode = "sample";     // "sample" | "explicit"
    std::string type = "lightlike";  // sampled line type
    std::vector<double> x;           // explicit only
    std::vector<double> v;

    friend bool operator==(const InitialCondition&, const InitialCondition&) = default;
};

struct ToleranceConfig {
    double boundary = Tolerances{}.boundary;
    double lightlike = Tolerances{}.lightlike;
    double null_normal = Tolerances{}.null_normal;
    double grazing = Tolerances{}.grazing;
    double drift = 1e-9;
    double bracket = 1e-10;
    double gradient = 1e-6;
    double lambda = 1e-8;
    double oval = 1e-8;
    double stability = 1e-6;

    Tolerances core() const { return {boundary, lightlike, null_normal, grazing}; }
    friend bool operator==(const ToleranceConfig&, const ToleranceConfig&) = default;
};

struct CurveConfig {
    std::string kind = "ellipse";  // ellipse | circle | null_chart_image | table
    std::vector<double> axes{2.0, 1.0};
    double radius = 1.0;
    std::string polygon;  // polygon+slopes file for kind "table"

    friend bool operator==(const CurveConfig&, const CurveConfig&) = default;
};

struct OvalConfig {
    CurveConfig curve{};
    std::array<double, 2> start{0.6, 0.8};  // a point on (or radially projected onto) the curve
    int steps = 10;
    int half_period = 2;
    std::string polygon;  // polygon+slopes file for `synth`
    int periods = 1;

    friend bool operator==(const OvalConfig&, const OvalConfig&) = default;
};

struct CommuteConfig {
    std::size_t samples = 10000;
    std::size_t gradient_samples = 1000;
    bool wrong_sign_adapter = false;
    unsigned workers = 0;

    friend bool operator==(const CommuteConfig&, const CommuteConfig&) = default;
};

struct FamilyPlotConfig {
    std::vector<double> lambdas{-0.9, -0.5, 0.0, 0.5, 1.5, 2.5, 3.5};
    int samples = 256;
    double extent = 0.0;  // half-width of the plotting box; 0 picks 2 max a

    friend bool operator==(const FamilyPlotConfig&, const FamilyPlotConfig&) = default;
};

struct RunConfig {
    std::array<int, 2> signature{2, 1};
    std::vector<double> axes{3.0, 2.0, 1.0};
    InitialCondition initial{};
    std::size_t bounces = 1000;
    std::uint64_t seed = 0;
    bool record_tangency = true;
    ToleranceConfig tolerances{};
    std::string output = "out";
    CommuteConfig commute{};
    OvalConfig oval{};
    FamilyPlotConfig family_plot{};

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Strict parse: unknown keys, wrong types and out-of-range values throw ConfigError.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);
/// Every field, defaults included.
nlohmann::json to_json(const RunConfig& cfg);

/// Checks that need the library: signature/axes compatibility, resonant axes,
/// explicit initial conditions on the boundary and inward.
void validate_geometry(const RunConfig& cfg);

}  // namespace pebill::cli
