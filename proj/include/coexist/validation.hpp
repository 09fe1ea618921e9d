// Self-check suite behind `coexist validate`: every structural invariant of
// the observables, the closed forms, and the circuit protocol, evaluated on
// fixed-seed random inputs.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "coexist/analytic.hpp"
#include "coexist/circuits.hpp"
#include "coexist/experiments.hpp"
#include "coexist/io.hpp"
#include "coexist/linalg.hpp"
#include "coexist/observables.hpp"

namespace coexist {

/// Gaussian amplitudes, normalized: uniform on the unit sphere of C^6.
inline JointState random_joint_state(std::mt19937_64& gen) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::array<cplx, 6> a{};
    for (auto& x : a) x = {g(gen), g(gen)};
    return JointState::normalized(a);
}

/// Optimal coexistence angle (degrees) and overlap for odd n in [5, 55].
struct ReferenceRow {
    int n;
    double theta_deg;
    double overlap;
};

inline constexpr std::array<ReferenceRow, 26> kReferenceCoexistence{{
    {5, 49.605, 0.343069},  {7, 46.568, 0.347839},  {9, 42.804, 0.353697},  {11, 40.174, 0.328131},
    {13, 37.825, 0.311358}, {15, 35.922, 0.289453}, {17, 34.24, 0.272828},  {19, 32.802, 0.255515},
    {21, 31.515, 0.241466}, {23, 30.381, 0.227717}, {25, 29.355, 0.216111}, {27, 28.432, 0.205008},
    {29, 27.588, 0.195383}, {31, 26.818, 0.186256}, {33, 26.107, 0.178192}, {35, 25.452, 0.170568},
    {37, 24.843, 0.163735}, {39, 24.277, 0.157276}, {41, 23.747, 0.151422}, {43, 23.252, 0.145882},
    {45, 22.785, 0.140814}, {47, 22.346, 0.136011}, {49, 21.932, 0.131586}, {51, 21.54, 0.127384},
    {53, 21.168, 0.123487}, {55, 20.815, 0.11978},
}};

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

namespace detail {

inline CheckResult check(std::string name, double worst, double tol) {
    const bool ok = worst <= tol;
    return {std::move(name), ok, "worst " + io::format_double(worst, 3) + " (tol " + io::format_double(tol, 3) + ")"};
}

}  // namespace detail

inline std::vector<CheckResult> run_validation(std::uint64_t seed = 20240601) {
    std::vector<CheckResult> out;
    std::mt19937_64 gen(seed);

    {
        double worst = 0.0;
        for (int n = 5; n <= 21; n += 2) {
            const auto g = cycle_geometry(n);
            worst = std::max(worst, std::abs(g.c2 * g.c2 + g.s2 * g.s2 - 1.0));
            if (!(g.c > 0 && g.c < 1 && g.lambda3 > g.lambda1 && g.lambda1 > 0)) worst = 1.0;
        }
        out.push_back(detail::check("cycle geometry constants", worst, 1e-12));
    }
    {
        double orth = 0.0, comm = 0.0, invol = 0.0;
        for (int n = 5; n <= 21; n += 2)
            for (int j = 0; j < n; ++j) {
                const auto a = kcbs_vector(n, j), b = kcbs_vector(n, (j + 1) % n);
                orth = std::max(orth, std::abs(a[0] * b[0] + a[1] * b[1] + a[2] * b[2]));
                const auto bj = kcbs_observable(n, j).matrix, bk = kcbs_observable(n, (j + 1) % n).matrix;
                comm = std::max(comm, max_abs_diff(bj * bk, bk * bj));
                invol = std::max(invol, max_abs_diff(bj * bj, ComplexMatrix::identity(3)));
            }
        out.push_back(detail::check("adjacent KCBS vectors orthogonal", orth, 1e-12));
        out.push_back(detail::check("adjacent KCBS observables commute", comm, 1e-12));
        out.push_back(detail::check("KCBS observables are involutions", invol, 1e-12));
    }
    {
        double b0 = 0.0, bb = 0.0, sop = 0.0;
        for (int n = 5; n <= 21; n += 2) {
            const int m = (n - 1) / 2;
            b0 = std::max(b0, max_abs_diff(b0_closed_form(n).matrix, kcbs_observable(n, 0).matrix));
            bb = std::max(bb, max_abs_diff(bm_bm1_closed_form(n).matrix,
                                           kcbs_observable(n, m).matrix * kcbs_observable(n, m + 1).matrix));
            const auto s = s_operator(n).matrix;
            sop = std::max({sop, max_abs_diff(kcbs_operator_assembled(n), s),
                            max_abs_diff(kcbs_operator_from_projectors(n), s)});
        }
        out.push_back(detail::check("B0 closed form matches construction", b0, 1e-12));
        out.push_back(detail::check("BmBm+1 closed form matches product", bb, 1e-12));
        out.push_back(detail::check("KCBS operator equals diag(l1, l1, l3)", sop, 1e-10));
    }
    {
        std::uniform_real_distribution<double> ang(0.0, 2.0 * kPi);
        double chsh = 0.0, kcbs = 0.0, tsirelson = 0.0, optimality = 0.0, recon = 0.0;
        for (int n : {5, 7, 9, 11}) {
            const auto s_op = tensor(ComplexMatrix::identity(2), s_operator(n).matrix);
            for (int t = 0; t < 100; ++t) {
                const auto psi = random_joint_state(gen);
                const auto k = chsh_coefficients(psi, n);
                const double w0 = ang(gen), w2 = ang(gen);
                chsh = std::max(chsh, std::abs(chsh_value(k, w0, w2) - expectation(psi, chsh_operator(n, w0, w2))));
                kcbs = std::max(kcbs, std::abs(kcbs_value(psi, n).s_kcbs - expectation(psi, s_op)));
                tsirelson = std::max(tsirelson, k.s_opt - kTsirelson);
                optimality = std::max(optimality, chsh_value(k, w0, w2) - k.s_opt);
                const auto r = coefficients_from_decomposition(decompose(psi, n), n);
                recon = std::max({recon, std::abs(r.x0 - k.x0), std::abs(r.y0 - k.y0), std::abs(r.x2 - k.x2),
                                  std::abs(r.y2 - k.y2)});
            }
        }
        out.push_back(detail::check("closed-form CHSH equals matrix expectation", chsh, 1e-10));
        out.push_back(detail::check("closed-form KCBS equals <I x S>", kcbs, 1e-10));
        out.push_back(detail::check("s_opt within Tsirelson bound", std::max(0.0, tsirelson), 1e-9));
        out.push_back(detail::check("s_opt dominates probe settings", std::max(0.0, optimality), 1e-12));
        out.push_back(detail::check("population/coherence decomposition reproduces X,Y", recon, 1e-12));
    }
    {
        double worst = 0.0;
        for (int a = 1; a <= 8; ++a)
            for (int b = 1; b <= 8; ++b)
                worst = std::max(worst, std::abs((gell_mann(a) * gell_mann(b)).trace() - (a == b ? 2.0 : 0.0)));
        out.push_back(detail::check("Gell-Mann orthogonality tr(la lb) = 2 d_ab", worst, 1e-12));
    }
    {
        std::uniform_real_distribution<double> th(0.0, kPi), ph(0.0, 2.0 * kPi);
        double prep = 0.0, fourier = 0.0, sym = 0.0;
        const int ns[] = {5, 7, 9};
        for (int t = 0; t < 60; ++t) {
            const double theta = th(gen), phi = ph(gen);
            const int n = ns[t % 3];
            const auto psi = state1({theta, phi});
            prep = std::max(prep, std::abs(1.0 - fidelity(prepare_state1(theta, phi), psi)));
            const auto k = chsh_coefficients(psi, n);
            const ComplexMatrix alices[] = {alice_rotation(k.omega0).matrix, alice_rotation(k.omega2).matrix,
                                            ComplexMatrix::identity(2)};
            const ComplexMatrix bobs[] = {b0_closed_form(n).matrix, bm_bm1_closed_form(n).matrix,
                                          kcbs_pair(n, t % n).matrix};
            const auto& a = alices[t % 3];
            const auto& b = bobs[(t / 3) % 3];
            const auto r = fourier_test(a, b, psi);
            fourier = std::max(fourier, std::abs(r.estimator_combined - expectation(psi, tensor(a, b))));
            sym = std::max({sym, std::abs(r.p1 - r.p2), std::abs(r.p0 + r.p1 + r.p2 - 1.0)});
        }
        out.push_back(detail::check("state preparation circuit fidelity", prep, 1e-12));
        out.push_back(detail::check("Fourier test reproduces <A x B>", fourier, 1e-10));
        out.push_back(detail::check("Fourier test P1 = P2, sum P = 1", sym, 1e-12));
    }
    {
        double dtheta = 0.0, doverlap = 0.0, residual = 0.0;
        for (const auto& row : kReferenceCoexistence) {
            const auto c = coexistence_point(row.n);
            dtheta = std::max(dtheta, std::abs(c.theta_opt_deg - row.theta_deg));
            doverlap = std::max(doverlap, std::abs(c.overlap - row.overlap));
            residual = std::max(residual, c.residual);
        }
        out.push_back(detail::check("coexistence angle vs reference table (deg)", dtheta, 0.01));
        out.push_back(detail::check("coexistence overlap vs reference table", doverlap, 1e-4));
        out.push_back(detail::check("coexistence bisection residual", residual, 1e-9));
    }
    {
        double smallest = 1e300;
        for (int n = 5; n <= 999; n += 2) {
            const auto m = psi_n_margins(n);
            smallest = std::min({smallest, m.chsh, m.kcbs});
        }
        out.push_back({"psi_n margins positive for odd n in [5, 999]", smallest > 0.0,
                       "smallest margin " + io::format_double(smallest, 3)});
    }
    return out;
}

/// Prints one line per check; returns true iff all passed.
inline bool report_validation(const std::vector<CheckResult>& results, std::ostream& os) {
    bool all = true;
    for (const auto& r : results) {
        os << (r.passed ? "[PASS] " : "[FAIL] ") << r.name << ": " << r.detail << '\n';
        all = all && r.passed;
    }
    os << (all ? "all checks passed" : "validation FAILED") << " (" << results.size() << " checks)\n";
    return all;
}

}  // namespace coexist
