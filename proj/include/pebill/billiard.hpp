#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pebill/confocal.hpp"
#include "pebill/pecore.hpp"

namespace pebill {

/// Free flight from a boundary point along an inward v to the next boundary
/// point; v is unchanged. Uses t* = -2 (Ax.v)/(Av.v) and one Newton step
/// along the normal to put the endpoint back on the ellipsoid.
RayState advance_to_boundary(const RayState& r, const Ellipsoid& ell, const Tolerances& tol = {});

/// Pseudo-Euclidean reflection at a boundary point: u = v - 2 (<v,n>/<n,n>) n,
/// where n_i = e_i (Ax)_i is the metric normal.
RayState reflect(const RayState& r, const Ellipsoid& ell, const Signature& sig, const Tolerances& tol = {});

/// reflect . advance_to_boundary
RayState billiard_map(const RayState& r, const Ellipsoid& ell, const Signature& sig,
                      const Tolerances& tol = {});

/// H(x, v) = Ax.v at a boundary point; negative for inward v.
double joachimsthal(const RayState& r, const Ellipsoid& ell, const Tolerances& tol = {});

/// Extension of H that is constant along the line x + t v: the value of Ax.v
/// at the point where the line enters the ellipsoid. NaN if the line misses it.
double joachimsthal_extended(const RayState& r, const Ellipsoid& ell);

/// F_k = v_k^2/e_k + sum_{i != k} (x_i v_k - x_k v_i)^2 / (e_i a_k^2 - e_k a_i^2), k zero-based.
double integral_F(std::size_t k, const Vec& x, const Vec& v, const Ellipsoid& ell, const Signature& sig);
/// All n+1 integrals at once.
Vec integrals_F(const Vec& x, const Vec& v, const Ellipsoid& ell, const Signature& sig);
/// Throws ResonantAxes when some denominator e_i a_k^2 - e_k a_i^2 vanishes.
void check_nonresonant(const Ellipsoid& ell, const Signature& sig);

struct OrbitOptions {
    Tolerances tol{};
    bool record_tangency = true;
    RootIsolationOptions roots{};
};

struct OrbitAbort {
    ErrorKind kind;
    std::string message;
    std::size_t at_bounce;  // index of the state from which the failing step started
};

/// Boundary states after each reflection together with the invariants at each.
struct OrbitRecord {
    std::vector<RayState> states;
    std::vector<double> H;
    std::vector<Vec> F;
    std::vector<TangencySet> tangency;  // empty when tangency recording is off
    std::optional<OrbitAbort> abort;

    std::size_t bounce_count() const noexcept { return states.empty() ? 0 : states.size() - 1; }
};

/// Iterates billiard_map N times from r. Failures stop the run and are kept in
/// OrbitRecord::abort; everything computed before the failure is returned.
/// On resonant tables F is recorded as empty vectors and tangency is skipped.
OrbitRecord run_orbit(const RayState& r, std::size_t bounces, const ConfocalFamily& fam,
                      const OrbitOptions& opts = {});

/// Boundary point area-uniform (auxiliary Euclidean metric) and an inward
/// direction of the requested type; deterministic in the seed.
RayState sample_ray(const Ellipsoid& ell, const Signature& sig, LineType type, std::uint64_t seed);
/// Inward light-like initial condition.
RayState sample_null_ray(const Ellipsoid& ell, const Signature& sig, std::uint64_t seed);

}  // namespace pebill
