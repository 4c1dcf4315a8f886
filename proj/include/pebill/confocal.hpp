#pragma once

#include <vector>

#include "pebill/pecore.hpp"

namespace pebill {

/// The pseudo-confocal family through an ellipsoid:
///   sum_{i<=p} x_i^2/(a_i^2 + lambda) + sum_{i>p} x_i^2/(a_i^2 - lambda) = 1.
/// Member coefficients are c_i(lambda) = a_i^2 + e_i lambda, so the poles sit
/// at lambda = -e_i a_i^2.
class ConfocalFamily {
public:
    ConfocalFamily(Ellipsoid ell, Signature sig);

    const Ellipsoid& ellipsoid() const noexcept { return ell_; }
    const Signature& signature() const noexcept { return sig_; }
    std::size_t dim() const noexcept { return ell_.dim(); }

    /// The one place where the sign convention of the family lives.
    double coefficient(std::size_t i, double lambda) const;
    /// Sorted, de-duplicated pole parameters.
    const std::vector<double>& poles() const noexcept { return poles_; }
    /// Distance below which a parameter counts as hitting a pole.
    double pole_tolerance() const noexcept { return pole_tol_; }
    bool near_pole(double lambda) const;

private:
    Ellipsoid ell_;
    Signature sig_;
    std::vector<double> poles_;
    double pole_tol_;
};

struct TangencyParameter {
    double lambda;
    bool double_root = false;  // |G| touched zero without a sign change
};

struct TangencySet {
    std::vector<TangencyParameter> params;  // ascending in lambda
    std::vector<double> spurious;           // discarded near-pole roots, diagnostics only

    std::size_t size() const noexcept { return params.size(); }
    std::vector<double> lambdas() const;
    bool has_double_root() const;
};

struct RootIsolationOptions {
    int grid_per_interval = 2048;
    double verify_tol = 1e-9;  // |G| relative to the magnitude of its summands
    double degenerate_tol = 1e-6;  // max |G|/magnitude below this: line touches the whole family
};

Quadric member(const ConfocalFamily& fam, double lambda);

/// G(lambda) = (x.Bv)^2 - (v.Bv)(x.Bx - 1), B = diag(1/c_i(lambda)); vanishes
/// exactly when the line x + t v touches the member at lambda.
double tangency_discriminant(const ConfocalFamily& fam, const RayState& r, double lambda);

/// Coefficients (ascending powers) of G(lambda) * prod_i c_i(lambda)^2, of
/// degree <= 2n+1 with leading coefficient <v,v>.
std::vector<double> cleared_polynomial(const ConfocalFamily& fam, const RayState& r);

TangencySet tangency_parameters(const ConfocalFamily& fam, const RayState& r,
                                const RootIsolationOptions& opts = {});

/// Evaluates a polynomial given by ascending coefficients.
double poly_eval(const std::vector<double>& coeffs, double x);

}  // namespace pebill
