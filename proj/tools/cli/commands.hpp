#pragma once

#include <string>
#include <vector>

#include "config.hpp"
#include "pebill/lorentz_oval.hpp"

namespace pebill::cli {

enum ExitCode : int { Clean = 0, ConfigFailure = 1, Quarantine = 2, ToleranceFailure = 3 };

/// Shortest decimal string that reads back to the same double ('.' decimal point).
std::string format_double(double x);

struct PolygonFile {
    std::vector<Point2> points;
    std::vector<double> slopes;
};
/// {"points": [[x, y], ...], "slopes": [t, ...]}
PolygonFile load_polygon(const std::string& path);

int cmd_simulate(const RunConfig& cfg);
int cmd_commute(const RunConfig& cfg);
int cmd_oval(const RunConfig& cfg, const std::string& mode);
int cmd_family_plot(const RunConfig& cfg);

}  // namespace pebill::cli
