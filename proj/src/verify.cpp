#include "pebill/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

namespace pebill {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t sample_seed(std::uint64_t seed, std::uint64_t index) { return splitmix64(seed ^ splitmix64(index)); }

unsigned resolve_workers(unsigned requested, std::size_t samples) {
    unsigned w = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
    return static_cast<unsigned>(std::min<std::size_t>(w, std::max<std::size_t>(samples, 1)));
}

/// Worst (value, index) over [0, count), chunked across threads. The result is
/// independent of the worker count: ties resolve to the smallest index.
template <class Fn>
std::pair<double, std::size_t> parallel_worst(std::size_t count, unsigned workers, Fn&& eval) {
    using Best = std::pair<double, std::size_t>;
    const Best none{-std::numeric_limits<double>::infinity(), 0};
    auto better = [](const Best& a, const Best& b) {
        if (std::isnan(a.first) != std::isnan(b.first)) return std::isnan(a.first);
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    };
    std::vector<Best> partial(workers, none);
    std::vector<std::exception_ptr> errors(workers);
    auto run = [&](unsigned w) {
        try {
            for (std::size_t i = w; i < count; i += workers) {
                const Best cand{eval(i), i};
                if (better(cand, partial[w])) partial[w] = cand;
            }
        } catch (...) {
            errors[w] = std::current_exception();
        }
    };
    if (workers <= 1) {
        run(0);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    Best best = none;
    for (const auto& b : partial)
        if (better(b, best)) best = b;
    return best;
}

double denominator(std::size_t i, std::size_t k, const Ellipsoid& ell, const Signature& sig) {
    const double ai = ell.axes()[static_cast<Eigen::Index>(i)];
    const double ak = ell.axes()[static_cast<Eigen::Index>(k)];
    return sig.e(i) * ak * ak - sig.e(k) * ai * ai;
}

/// Sum of the magnitudes of every term entering the F_k.
double integral_scale(const Vec& x, const Vec& v, const Ellipsoid& ell, const Signature& sig) {
    double s = 0.0;
    const std::size_t n = ell.dim();
    for (std::size_t k = 0; k < n; ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        s += v[kk] * v[kk];
        for (std::size_t i = 0; i < n; ++i) {
            if (i == k) continue;
            const auto ii = static_cast<Eigen::Index>(i);
            const double m = x[ii] * v[kk] - x[kk] * v[ii];
            s += std::abs(m * m / denominator(i, k, ell, sig));
        }
    }
    return s;
}

double drift(double value, double reference) {
    const double d = std::abs(value - reference);
    return std::abs(reference) > 1e-8 ? d / std::abs(reference) : d;
}

}  // namespace

// ---------------------------------------------------------------------------
// Adapter and observables

Vec MetricAdapter::momentum(const Vec& v) const { return wrong_sign_ ? v : Vec(sig_.signs().cwiseProduct(v)); }

Vec MetricAdapter::velocity(const Vec& p) const { return wrong_sign_ ? p : Vec(sig_.signs().cwiseProduct(p)); }

Vec MetricAdapter::pullback(const Vec& grad_v) const {
    // v_i = e_i p_i, so dF/dp_i = e_i dF/dv_i
    return wrong_sign_ ? grad_v : Vec(sig_.signs().cwiseProduct(grad_v));
}

PhaseGradientV integral_F_gradient(std::size_t k, const Vec& x, const Vec& v, const Ellipsoid& ell,
                                   const Signature& sig) {
    const std::size_t n = ell.dim();
    require_same_dim(static_cast<std::size_t>(x.size()), n, "integral_F_gradient");
    require_same_dim(static_cast<std::size_t>(v.size()), n, "integral_F_gradient");
    check_nonresonant(ell, sig);
    PhaseGradientV g{Vec::Zero(static_cast<Eigen::Index>(n)), Vec::Zero(static_cast<Eigen::Index>(n))};
    const auto kk = static_cast<Eigen::Index>(k);
    g.dv[kk] = 2.0 * v[kk] * sig.e(k);
    for (std::size_t i = 0; i < n; ++i) {
        if (i == k) continue;
        const auto ii = static_cast<Eigen::Index>(i);
        const double m = x[ii] * v[kk] - x[kk] * v[ii];
        const double w = 2.0 * m / denominator(i, k, ell, sig);
        g.dx[ii] += w * v[kk];
        g.dx[kk] -= w * v[ii];
        g.dv[kk] += w * x[ii];
        g.dv[ii] -= w * x[kk];
    }
    return g;
}

Observable integral_observable(std::size_t k, const Ellipsoid& ell, const MetricAdapter& adapter) {
    Observable obs;
    obs.value = [k, ell, adapter](const Vec& x, const Vec& p) {
        return integral_F(k, x, adapter.velocity(p), ell, adapter.signature());
    };
    obs.gradient = [k, ell, adapter](const Vec& x, const Vec& p) {
        const auto g = integral_F_gradient(k, x, adapter.velocity(p), ell, adapter.signature());
        return PhaseGradient{g.dx, adapter.pullback(g.dv)};
    };
    return obs;
}

Observable coordinate_observable(std::size_t i, bool on_momentum, std::size_t dim) {
    const auto ii = static_cast<Eigen::Index>(i);
    const auto n = static_cast<Eigen::Index>(dim);
    Observable obs;
    obs.value = [ii, on_momentum](const Vec& x, const Vec& p) { return on_momentum ? p[ii] : x[ii]; };
    obs.gradient = [ii, n, on_momentum](const Vec&, const Vec&) {
        PhaseGradient g{Vec::Zero(n), Vec::Zero(n)};
        (on_momentum ? g.dp : g.dx)[ii] = 1.0;
        return g;
    };
    return obs;
}

PhaseGradient finite_difference_gradient(const Observable& f, const Vec& x, const Vec& p) {
    const auto n = x.size();
    PhaseGradient g{Vec(n), Vec(n)};
    auto partial = [&](bool on_p, Eigen::Index i) {
        Vec xp = x;
        Vec pp = p;
        Vec& z = on_p ? pp : xp;
        const double z0 = z[i];
        const double h = 1e-5 * std::max(1.0, std::abs(z0));
        z[i] = z0 + h;
        const double up = f.value(xp, pp);
        z[i] = z0 - h;
        const double down = f.value(xp, pp);
        const double d = (up - down) / (2.0 * h);
        if (!std::isfinite(d)) {
            throw Error(ErrorKind::InvalidArgument, "finite-difference step produced a non-finite derivative");
        }
        return d;
    };
    for (Eigen::Index i = 0; i < n; ++i) {
        g.dx[i] = partial(false, i);
        g.dp[i] = partial(true, i);
    }
    return g;
}

double poisson_bracket(const Observable& f, const Observable& g, const Vec& x, const Vec& p, BracketMode mode) {
    require_same_dim(static_cast<std::size_t>(x.size()), static_cast<std::size_t>(p.size()), "poisson_bracket");
    auto grad = [&](const Observable& o) {
        if (mode == BracketMode::Analytic && o.gradient) return o.gradient(x, p);
        return finite_difference_gradient(o, x, p);
    };
    const PhaseGradient gf = grad(f);
    const PhaseGradient gg = grad(g);
    return gf.dx.dot(gg.dp) - gf.dp.dot(gg.dx);
}

// ---------------------------------------------------------------------------
// Sweeps

std::pair<Vec, Vec> random_phase_point(const Ellipsoid& ell, std::uint64_t seed, std::uint64_t index) {
    std::mt19937_64 rng(sample_seed(seed, index));
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto n = static_cast<Eigen::Index>(ell.dim());
    Vec x(n);
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = 1.5 * ell.axes()[i] * unit(rng);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
    return {x, v};
}

std::vector<BracketReport> commutation_sweep(const Ellipsoid& ell, const Signature& sig, std::size_t samples,
                                             std::uint64_t seed, const SweepOptions& opts) {
    require_same_dim(ell.dim(), sig.dim(), "commutation_sweep");
    if (ell.dim() > opts.max_dim) {
        throw Error(ErrorKind::InvalidArgument, "dimension exceeds the configured sweep maximum");
    }
    check_nonresonant(ell, sig);
    const MetricAdapter adapter(sig, opts.wrong_sign_adapter);
    const std::size_t n = ell.dim();
    std::vector<Observable> obs;
    for (std::size_t k = 0; k < n; ++k) obs.push_back(integral_observable(k, ell, adapter));

    std::vector<BracketReport> reports;
    const unsigned workers = resolve_workers(opts.workers, samples);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = j + 1; k < n; ++k) {
            auto eval = [&](std::size_t i) {
                const auto [x, v] = random_phase_point(ell, seed, i);
                const Vec p = adapter.momentum(v);
                const auto gj = obs[j].gradient(x, p);
                const auto gk = obs[k].gradient(x, p);
                const double norm_j = std::sqrt(gj.dx.squaredNorm() + gj.dp.squaredNorm());
                const double norm_k = std::sqrt(gk.dx.squaredNorm() + gk.dp.squaredNorm());
                if (norm_j == 0.0 || norm_k == 0.0) return 0.0;
                return std::abs(gj.dx.dot(gk.dp) - gj.dp.dot(gk.dx)) / (norm_j * norm_k);
            };
            BracketReport rep{j, k, samples, 0.0, Vec(), Vec()};
            if (samples > 0) {
                const auto [worst, at] = parallel_worst(samples, workers, eval);
                const auto [x, v] = random_phase_point(ell, seed, at);
                rep.max_normalized = worst;
                rep.worst_x = x;
                rep.worst_p = adapter.momentum(v);
            }
            reports.push_back(std::move(rep));
        }
    }
    return reports;
}

double gradient_check(const Ellipsoid& ell, const Signature& sig, std::size_t samples, std::uint64_t seed) {
    const MetricAdapter adapter(sig);
    double worst = 0.0;
    for (std::size_t k = 0; k < ell.dim(); ++k) {
        const Observable obs = integral_observable(k, ell, adapter);
        for (std::size_t i = 0; i < samples; ++i) {
            const auto [x, v] = random_phase_point(ell, seed, i);
            const Vec p = adapter.momentum(v);
            const auto exact = obs.gradient(x, p);
            const auto approx = finite_difference_gradient(obs, x, p);
            const double num = std::sqrt((exact.dx - approx.dx).squaredNorm() + (exact.dp - approx.dp).squaredNorm());
            const double den = std::sqrt(exact.dx.squaredNorm() + exact.dp.squaredNorm());
            worst = std::max(worst, den > 0.0 ? num / den : num);
        }
    }
    return worst;
}

double sum_rule_check(const Ellipsoid& ell, const Signature& sig, std::size_t samples, std::uint64_t seed,
                      unsigned workers) {
    check_nonresonant(ell, sig);
    auto eval = [&](std::size_t i) {
        const auto [x, v] = random_phase_point(ell, seed, i);
        const double sum = integrals_F(x, v, ell, sig).sum();
        return std::abs(sum - inner(v, v, sig)) / integral_scale(x, v, ell, sig);
    };
    if (samples == 0) return 0.0;
    return parallel_worst(samples, resolve_workers(workers, samples), eval).first;
}

// ---------------------------------------------------------------------------
// Orbit drift

double DriftReport::max_drift() const {
    double m = H;
    for (double d : F) m = std::max(m, d);
    for (double d : lambda) m = std::max(m, d);
    return m;
}

DriftReport drift_report(const OrbitRecord& orbit, const DriftOptions& opts) {
    if (orbit.states.size() < 2) {
        throw Error(ErrorKind::InvalidArgument, "drift needs an orbit with at least one completed bounce");
    }
    DriftReport rep;
    rep.bounces = orbit.bounce_count();
    rep.abort = orbit.abort;

    for (std::size_t b = 1; b < orbit.H.size(); ++b) {
        const double d = drift(orbit.H[b], orbit.H[0]);
        if (d > rep.H) {
            rep.H = d;
            rep.H_worst_bounce = b;
        }
    }

    const auto nf = static_cast<std::size_t>(orbit.F.front().size());
    rep.F.assign(nf, 0.0);
    rep.F_worst_bounce.assign(nf, 0);
    for (std::size_t b = 1; b < orbit.F.size(); ++b) {
        for (std::size_t k = 0; k < nf; ++k) {
            const auto kk = static_cast<Eigen::Index>(k);
            const double d = drift(orbit.F[b][kk], orbit.F[0][kk]);
            if (d > rep.F[k]) {
                rep.F[k] = d;
                rep.F_worst_bounce[k] = b;
            }
        }
    }

    if (!orbit.tangency.empty()) {
        const auto reference = orbit.tangency.front().lambdas();
        rep.lambda.assign(reference.size(), 0.0);
        rep.lambda_worst_bounce.assign(reference.size(), 0);
        for (std::size_t b = 1; b < orbit.tangency.size(); ++b) {
            auto current = orbit.tangency[b].lambdas();
            if (current.size() != reference.size()) {
                throw Error(ErrorKind::TangencyCountChanged,
                            "bounce " + std::to_string(b) + " has " + std::to_string(current.size()) +
                                " tangency parameters, bounce 0 has " + std::to_string(reference.size()));
            }
            // greedy nearest-value pairing
            std::vector<bool> used(current.size(), false);
            std::vector<double> matched(reference.size());
            for (std::size_t r = 0; r < reference.size(); ++r) {
                std::size_t best = 0;
                double best_dist = std::numeric_limits<double>::infinity();
                for (std::size_t c = 0; c < current.size(); ++c) {
                    if (used[c]) continue;
                    const double dist = std::abs(current[c] - reference[r]);
                    if (dist < best_dist) {
                        best_dist = dist;
                        best = c;
                    }
                }
                used[best] = true;
                matched[r] = current[best];
                const double d = drift(current[best], reference[r]);
                if (d > rep.lambda[r]) {
                    rep.lambda[r] = d;
                    rep.lambda_worst_bounce[r] = b;
                }
                if (d > 10.0 * opts.lambda_tol) rep.lambda_mismatch = true;
            }
            // the pairing has to respect the ascending order of both lists
            if (!std::is_sorted(matched.begin(), matched.end())) rep.lambda_mismatch = true;
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Free flight

FreeFlightReport free_flight_defect(const Ellipsoid& ell, const Signature& sig, const RayState& r, double t) {
    const Vec moved = r.x + t * r.v;
    const Vec f0 = integrals_F(r.x, r.v, ell, sig);
    const Vec f1 = integrals_F(moved, r.v, ell, sig);
    FreeFlightReport rep;
    rep.F_defect = (f1 - f0).cwiseAbs().maxCoeff() / integral_scale(r.x, r.v, ell, sig);
    const double h0 = joachimsthal_extended(r, ell);
    const double h1 = joachimsthal_extended({moved, r.v}, ell);
    rep.H_defect = std::abs(h1 - h0) / std::abs(h0);
    return rep;
}

FreeFlightReport free_flight_invariance(const Ellipsoid& ell, const Signature& sig, std::size_t samples,
                                        std::uint64_t seed) {
    check_nonresonant(ell, sig);
    std::vector<LineType> types;
    if (sig.p() > 0) types.push_back(LineType::Spacelike);
    if (sig.q() > 0) types.push_back(LineType::Timelike);
    if (sig.p() > 0 && sig.q() > 0) types.push_back(LineType::Lightlike);

    FreeFlightReport worst;
    for (std::size_t i = 0; i < samples; ++i) {
        const std::uint64_t s = sample_seed(seed, i);
        const RayState r = sample_ray(ell, sig, types[i % types.size()], s);
        std::mt19937_64 rng(splitmix64(s));
        const double chord = -2.0 * ell.form(r.x, r.v) / ell.form(r.v, r.v);
        const double t = std::uniform_real_distribution<double>(-chord, 2.0 * chord)(rng);
        const auto rep = free_flight_defect(ell, sig, r, t);
        worst.F_defect = std::max(worst.F_defect, rep.F_defect);
        worst.H_defect = std::max(worst.H_defect, rep.H_defect);
    }
    return worst;
}

}  // namespace pebill
