#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "pebill/billiard.hpp"
#include "pebill/pecore.hpp"

namespace pebill {

/// Phase space is (x, p) with p = E v. Every observable goes through this
/// adapter; `wrong_sign` drops the metric (p = v) and exists only as a
/// negative control for the bracket machinery.
class MetricAdapter {
public:
    explicit MetricAdapter(Signature sig, bool wrong_sign = false) : sig_(sig), wrong_sign_(wrong_sign) {}

    Vec momentum(const Vec& v) const;
    Vec velocity(const Vec& p) const;
    /// dF/dp from dF/dv
    Vec pullback(const Vec& grad_v) const;
    const Signature& signature() const noexcept { return sig_; }
    bool wrong_sign() const noexcept { return wrong_sign_; }

private:
    Signature sig_;
    bool wrong_sign_;
};

struct PhaseGradient {
    Vec dx;
    Vec dp;
};

/// A function on phase space; `gradient` may be empty, in which case brackets
/// fall back to finite differences.
struct Observable {
    std::function<double(const Vec& x, const Vec& p)> value;
    std::function<PhaseGradient(const Vec& x, const Vec& p)> gradient;
};

struct PhaseGradientV {
    Vec dx;
    Vec dv;
};
/// Exact gradient of F_k with respect to (x, v).
PhaseGradientV integral_F_gradient(std::size_t k, const Vec& x, const Vec& v, const Ellipsoid& ell,
                                   const Signature& sig);

Observable integral_observable(std::size_t k, const Ellipsoid& ell, const MetricAdapter& adapter);
/// The coordinate function x_i (on_momentum = false) or p_i.
Observable coordinate_observable(std::size_t i, bool on_momentum, std::size_t dim);

enum class BracketMode { Analytic, FiniteDifference };

/// sum_i dF/dx_i dG/dp_i - dF/dp_i dG/dx_i
double poisson_bracket(const Observable& f, const Observable& g, const Vec& x, const Vec& p,
                       BracketMode mode = BracketMode::Analytic);
PhaseGradient finite_difference_gradient(const Observable& f, const Vec& x, const Vec& p);

struct BracketReport {
    std::size_t j;
    std::size_t k;
    std::size_t samples;
    double max_normalized;  // max |{F_j, F_k}| / (|grad F_j| |grad F_k|)
    Vec worst_x;
    Vec worst_p;
};

struct SweepOptions {
    std::size_t max_dim = 6;
    bool wrong_sign_adapter = false;
    unsigned workers = 0;  // 0: hardware concurrency
};

/// Random phase point for sample `index`; depends only on (seed, index).
std::pair<Vec, Vec> random_phase_point(const Ellipsoid& ell, std::uint64_t seed, std::uint64_t index);

std::vector<BracketReport> commutation_sweep(const Ellipsoid& ell, const Signature& sig, std::size_t samples,
                                             std::uint64_t seed, const SweepOptions& opts = {});

/// max over samples of |analytic - central difference| / |analytic| for the
/// full phase gradient of every F_k.
double gradient_check(const Ellipsoid& ell, const Signature& sig, std::size_t samples, std::uint64_t seed);

/// max over samples of |sum_k F_k - <v,v>| relative to the summed magnitudes.
double sum_rule_check(const Ellipsoid& ell, const Signature& sig, std::size_t samples, std::uint64_t seed,
                      unsigned workers = 0);

struct DriftOptions {
    double lambda_tol = 1e-8;
};

struct DriftReport {
    double H = 0.0;
    std::size_t H_worst_bounce = 0;
    std::vector<double> F;
    std::vector<std::size_t> F_worst_bounce;
    std::vector<double> lambda;
    std::vector<std::size_t> lambda_worst_bounce;
    bool lambda_mismatch = false;
    std::size_t bounces = 0;
    std::optional<OrbitAbort> abort;

    double max_drift() const;
};

/// Drift of every recorded invariant against its bounce-0 value. Relative when
/// |value_0| > 1e-8, absolute otherwise. Throws TangencyCountChanged when two
/// bounces disagree on the number of tangency parameters.
DriftReport drift_report(const OrbitRecord& orbit, const DriftOptions& opts = {});

struct FreeFlightReport {
    double F_defect = 0.0;  // relative to the magnitude of the F_k summands
    double H_defect = 0.0;  // relative to |H|
};

/// Defects of F_k and of the line-extended H after sliding the base point by t.
FreeFlightReport free_flight_defect(const Ellipsoid& ell, const Signature& sig, const RayState& r, double t);
/// Worst free_flight_defect over random boundary states of all three types and random t.
FreeFlightReport free_flight_invariance(const Ellipsoid& ell, const Signature& sig, std::size_t samples,
                                        std::uint64_t seed);

}  // namespace pebill
