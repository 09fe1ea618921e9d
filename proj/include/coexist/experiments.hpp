// Drivers over the state1 family: violation landscapes, the CHSH/KCBS
// coexistence point per cycle size, and n-scaling studies.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "coexist/analytic.hpp"
#include "coexist/circuits.hpp"
#include "coexist/error.hpp"
#include "coexist/observables.hpp"

namespace coexist {

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

enum class ScanMode { Analytic, Circuit };

struct LandscapeRecord {
    int n = 5;
    double theta_deg = 0.0;
    double phi_deg = 0.0;
    double chsh_margin = 0.0;
    double kcbs_margin = 0.0;
    ScanMode mode = ScanMode::Analytic;
    std::optional<std::uint64_t> shots;
    std::optional<std::uint64_t> seed;
    // One standard error of each margin (circuit mode only).
    double chsh_stderr = 0.0;
    double kcbs_stderr = 0.0;
};

struct CoexistenceRecord {
    int n = 5;
    double theta_opt_deg = 0.0;
    double overlap = 0.0;
    int iterations = 0;
    double residual = 0.0;
};

/// `count` evenly spaced values from start to stop, endpoints included.
inline std::vector<double> linspace(double start, double stop, std::size_t count) {
    if (count == 0) throw Error(ErrorCode::EmptyGrid, "grid count must be positive");
    if (count == 1) return {start};
    std::vector<double> out(count);
    const double step = (stop - start) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) out[i] = start + step * static_cast<double>(i);
    out.back() = stop;
    return out;
}

/// Runs body(i) for i in [0, count) over `threads` workers; each index is
/// owned by exactly one worker.
inline void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::exception_ptr> errors(threads);
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back([&, t] {
                try {
                    for (std::size_t i = t; i < count; i += threads) body(i);
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

namespace detail {

struct SampledTerm {
    double estimate;
    double variance;  // of the estimate
};

inline SampledTerm sampled_correlator(const ComplexMatrix& alice2, const ComplexMatrix& bob3,
                                      const JointState& psi, std::uint64_t shots, std::uint64_t seed) {
    const auto exact = fourier_test(alice2, bob3, psi);
    const auto sampled = sample_shots(exact, shots, seed);
    const double se = combined_standard_error(exact, shots);
    return {sampled.estimator_combined, se * se};
}

inline LandscapeRecord circuit_cell(int n, double theta, double phi, std::uint64_t shots,
                                    std::uint64_t cell_seed) {
    const JointState psi = prepare_state1(theta, phi);
    const auto k = chsh_coefficients(psi, n);
    const auto b0 = b0_closed_form(n).matrix;
    const auto bb = bm_bm1_closed_form(n).matrix;
    const auto r0 = alice_rotation(k.omega0).matrix;
    const auto r2 = alice_rotation(k.omega2).matrix;

    struct Term {
        const ComplexMatrix* a;
        const ComplexMatrix* b;
        double sign;
    };
    const Term chsh_terms[] = {{&r2, &bb, 1.0}, {&r2, &b0, 1.0}, {&r0, &bb, 1.0}, {&r0, &b0, -1.0}};

    std::uint64_t sub = 0;
    double chsh = 0.0, chsh_var = 0.0;
    for (const auto& t : chsh_terms) {
        const auto s = sampled_correlator(*t.a, *t.b, psi, shots, derive_seed(cell_seed, sub++));
        chsh += t.sign * s.estimate;
        chsh_var += s.variance;
    }

    const auto id2 = ComplexMatrix::identity(2);
    double kcbs = 0.0, kcbs_var = 0.0;
    for (int j = 0; j < n; ++j) {
        const auto s = sampled_correlator(id2, kcbs_pair(n, j).matrix, psi, shots, derive_seed(cell_seed, sub++));
        kcbs += kcbs_cycle_sign(n, j) * s.estimate;
        kcbs_var += s.variance;
    }

    LandscapeRecord r;
    r.chsh_margin = chsh - 2.0;
    r.kcbs_margin = kcbs - (n - 2.0);
    r.chsh_stderr = std::sqrt(chsh_var);
    r.kcbs_stderr = std::sqrt(kcbs_var);
    return r;
}

}  // namespace detail

struct LandscapeOptions {
    ScanMode mode = ScanMode::Analytic;
    std::optional<std::uint64_t> shots;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
};

/// One record per (theta, phi) cell, theta-major, angles in degrees.
/// Circuit mode estimates every correlator with a sampled Fourier test at
/// the analytically optimal Alice settings; cell i uses seed
/// derive_seed(master, i).
inline std::vector<LandscapeRecord> landscape_scan(int n, std::span<const double> theta_grid_deg,
                                                   std::span<const double> phi_grid_deg,
                                                   const LandscapeOptions& opt = {}) {
    validate_cycle(n);
    if (theta_grid_deg.empty() || phi_grid_deg.empty())
        throw Error(ErrorCode::EmptyGrid, "landscape grids must be nonempty");
    if (opt.mode == ScanMode::Circuit && (!opt.shots || *opt.shots == 0))
        throw Error(ErrorCode::Usage, "circuit mode requires a positive shot count");
    const std::uint64_t master = opt.seed.value_or(0);

    const std::size_t nphi = phi_grid_deg.size();
    std::vector<LandscapeRecord> out(theta_grid_deg.size() * nphi);
    parallel_for(out.size(), opt.threads, [&](std::size_t i) {
        const double theta_deg = theta_grid_deg[i / nphi];
        const double phi_deg = phi_grid_deg[i % nphi];
        const double theta = deg_to_rad(theta_deg);
        const double phi = deg_to_rad(phi_deg);
        LandscapeRecord r;
        if (opt.mode == ScanMode::Analytic) {
            const auto m = state1_margins({theta, phi}, n);
            r.chsh_margin = m.chsh;
            r.kcbs_margin = m.kcbs;
        } else {
            const std::uint64_t cell_seed = derive_seed(master, i);
            r = detail::circuit_cell(n, theta, phi, *opt.shots, cell_seed);
            r.shots = opt.shots;
            r.seed = cell_seed;
        }
        r.n = n;
        r.theta_deg = theta_deg;
        r.phi_deg = phi_deg;
        r.mode = opt.mode;
        out[i] = r;
    });
    return out;
}

inline constexpr double kBracketEps = 1e-6;
inline constexpr double kThetaTol = 1e-10;
inline constexpr double kResidualTarget = 1e-12;

/// Crossing of the CHSH and KCBS margins of state1 at phi = 0, found by
/// bisection on (eps, pi/2 - eps). The overlap is the common margin.
inline CoexistenceRecord coexistence_point(int n) {
    validate_cycle(n);
    auto diff = [n](double theta) {
        const auto m = state1_margins({theta, 0.0}, n);
        return m.chsh - m.kcbs;
    };
    double lo = kBracketEps, hi = kPi / 2.0 - kBracketEps;
    double flo = diff(lo);
    const double fhi = diff(hi);
    if (flo == 0.0) hi = lo;
    else if (fhi == 0.0) lo = hi;
    else if ((flo < 0.0) == (fhi < 0.0))
        throw Error(ErrorCode::NoIntersection,
                    "margin difference does not change sign for n = " + std::to_string(n));

    int iterations = 0;
    double mid = 0.5 * (lo + hi);
    double fmid = diff(mid);
    // Past the angular tolerance, keep halving until the residual is tiny or
    // the bracket no longer shrinks in double precision.
    while (iterations < 200 && fmid != 0.0 && (hi - lo > kThetaTol || std::abs(fmid) > kResidualTarget)) {
        if ((fmid < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
        const double next = 0.5 * (lo + hi);
        ++iterations;
        if (next == mid) break;
        mid = next;
        fmid = diff(mid);
    }

    const auto m = state1_margins({mid, 0.0}, n);
    CoexistenceRecord r;
    r.n = n;
    r.theta_opt_deg = rad_to_deg(mid);
    r.overlap = 0.5 * (m.chsh + m.kcbs);
    r.iterations = iterations;
    r.residual = std::abs(m.chsh - m.kcbs);
    return r;
}

/// Odd integers from `first` to `last` inclusive with the given step.
inline std::vector<int> odd_range(int first, int last, int step = 2) {
    if (step <= 0) throw Error(ErrorCode::Usage, "range step must be positive");
    std::vector<int> out;
    for (int n = first; n <= last; n += step) {
        validate_cycle(n);
        out.push_back(n);
    }
    if (out.empty()) throw Error(ErrorCode::EmptyGrid, "empty cycle-size range");
    return out;
}

inline std::vector<CoexistenceRecord> coexistence_table(std::span<const int> ns, unsigned threads = 1) {
    std::vector<CoexistenceRecord> out(ns.size());
    parallel_for(ns.size(), threads, [&](std::size_t i) { out[i] = coexistence_point(ns[i]); });
    return out;
}

struct ScalingRow {
    CoexistenceRecord coexistence;
    Margins psi_n;       // exact margins of psi_n_state(n, 0)
    Margins asymptotic;  // 8(n+2)/(n+4)^2 and 8/(n+4)
};

struct ScalingStudy {
    std::vector<ScalingRow> rows;
    double overlap_slope = 0.0;  // d log(overlap) / d log(n)
    double theta_slope = 0.0;    // d log(theta_opt) / d log(n)
};

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw Error(ErrorCode::EmptyGrid, "slope fit needs at least two points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
    }
    const double k = static_cast<double>(x.size());
    return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

inline ScalingStudy scaling_study(std::span<const int> ns, unsigned threads = 1) {
    if (ns.empty()) throw Error(ErrorCode::EmptyGrid, "empty cycle-size range");
    const auto coex = coexistence_table(ns, threads);
    ScalingStudy s;
    std::vector<double> xs, overlaps, thetas;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        s.rows.push_back({coex[i], psi_n_margins(ns[i]), asymptotic_margins(ns[i])});
        xs.push_back(ns[i]);
        overlaps.push_back(coex[i].overlap);
        thetas.push_back(coex[i].theta_opt_deg);
    }
    if (xs.size() >= 2) {
        s.overlap_slope = loglog_slope(xs, overlaps);
        s.theta_slope = loglog_slope(xs, thetas);
    }
    return s;
}

inline ScalingStudy scaling_study(int n_min, int n_max, unsigned threads = 1) {
    if (n_min % 2 == 0 || n_max % 2 == 0)
        throw Error(ErrorCode::InvalidCycle, "scaling bounds must be odd");
    const auto ns = odd_range(n_min, n_max);
    return scaling_study(ns, threads);
}

}  // namespace coexist
