#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "commands.hpp"
#include "config.hpp"

using namespace pebill;
using namespace pebill::cli;

namespace {

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::DimensionMismatch:
        case ErrorKind::ZeroVector:
        case ErrorKind::InvalidArgument:
        case ErrorKind::PoleParameter:
        case ErrorKind::ResonantAxes:
        case ErrorKind::OffBoundary:
        case ErrorKind::NotInward:
        case ErrorKind::InfeasibleSlopes:
        case ErrorKind::ZeroSlope:
            return ConfigFailure;
        case ErrorKind::RootIsolationFailure:
        case ErrorKind::NullNormal:
        case ErrorKind::ExhaustedRejection:
        case ErrorKind::DegenerateChord:
        case ErrorKind::NoConvergence:
        case ErrorKind::ConvexityViolation:
        case ErrorKind::TangencyCountChanged:
            return Quarantine;
    }
    return Quarantine;
}

struct Overrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<double> boundary, lightlike, null_normal, grazing, drift, bracket, gradient, lambda, oval, stability;
    bool wrong_sign = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config_path, "JSON run configuration (defaults when omitted)");
    cmd->add_option("--seed", o.seed, "override the configured seed");
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--tol-boundary", o.boundary);
    cmd->add_option("--tol-lightlike", o.lightlike);
    cmd->add_option("--tol-null-normal", o.null_normal);
    cmd->add_option("--tol-grazing", o.grazing);
    cmd->add_option("--tol-drift", o.drift);
    cmd->add_option("--tol-bracket", o.bracket);
    cmd->add_option("--tol-gradient", o.gradient);
    cmd->add_option("--tol-lambda", o.lambda);
    cmd->add_option("--tol-oval", o.oval);
    cmd->add_option("--tol-stability", o.stability);
}

RunConfig resolve(const Overrides& o) {
    RunConfig cfg = o.config_path.empty() ? RunConfig{} : load_config(o.config_path);
    if (o.seed) cfg.seed = *o.seed;
    if (o.out) cfg.output = *o.out;
    auto& t = cfg.tolerances;
    auto set = [](double& field, const std::optional<double>& value, const char* flag) {
        if (!value) return;
        if (!(*value > 0.0)) throw ConfigError(std::string(flag) + " must be positive");
        field = *value;
    };
    set(t.boundary, o.boundary, "--tol-boundary");
    set(t.lightlike, o.lightlike, "--tol-lightlike");
    set(t.null_normal, o.null_normal, "--tol-null-normal");
    set(t.grazing, o.grazing, "--tol-grazing");
    set(t.drift, o.drift, "--tol-drift");
    set(t.bracket, o.bracket, "--tol-bracket");
    set(t.gradient, o.gradient, "--tol-gradient");
    set(t.lambda, o.lambda, "--tol-lambda");
    set(t.oval, o.oval, "--tol-oval");
    set(t.stability, o.stability, "--tol-stability");
    if (o.wrong_sign) cfg.commute.wrong_sign_adapter = true;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Billiards in pseudo-Euclidean ellipsoids and Lorentz ovals"};
    app.require_subcommand(1);
    Overrides o;

    auto* simulate = app.add_subcommand("simulate", "billiard orbit with invariant drift report");
    add_common(simulate, o);
    auto* commute = app.add_subcommand("commute", "Poisson brackets of the integrals at random phase points");
    add_common(commute, o);
    commute->add_flag("--debug-wrong-sign", o.wrong_sign, "drop the metric in p = E v (negative control)");
    auto* oval = app.add_subcommand("oval", "Lorentz oval map experiments");
    oval->require_subcommand(1);
    std::string oval_mode;
    for (const char* mode : {"iterate", "periodic", "synth"}) {
        auto* sub = oval->add_subcommand(mode);
        add_common(sub, o);
        sub->callback([&oval_mode, mode] { oval_mode = mode; });
    }
    auto* family = app.add_subcommand("family-plot", "polylines of confocal family members");
    add_common(family, o);
    auto* dump = app.add_subcommand("dump-config", "print the fully resolved configuration");
    add_common(dump, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : ConfigFailure;
    }

    try {
        const RunConfig cfg = resolve(o);
        if (simulate->parsed()) return cmd_simulate(cfg);
        if (commute->parsed()) return cmd_commute(cfg);
        if (oval->parsed()) return cmd_oval(cfg, oval_mode);
        if (family->parsed()) return cmd_family_plot(cfg);
        if (dump->parsed()) {
            std::cout << to_json(cfg).dump(2) << '\n';
            return Clean;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return ConfigFailure;
    } catch (const Error& e) {
        const int code = exit_code_for(e.kind());
        std::cerr << (code == ConfigFailure ? "config error: " : "degenerate configuration: ") << e.what() << "\n";
        return code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return ConfigFailure;
    }
    return ConfigFailure;
}
