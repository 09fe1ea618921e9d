// Closed-form CHSH and KCBS evaluation for pure qubit-qutrit states.
//
// The CHSH operator is
//   R(w2) x (BmBm1 + B0) + R(w0) x (BmBm1 - B0)
// and its expectation collapses to X0 cos w0 + Y0 sin w0 + X2 cos w2 + Y2 sin w2.
// The KCBS expectation depends only on p2, the weight of Bob's level |2>.
#pragma once

#include <array>
#include <cmath>
#include <utility>

#include "coexist/error.hpp"
#include "coexist/linalg.hpp"
#include "coexist/observables.hpp"

namespace coexist {

inline constexpr double kTsirelson = 2.0 * std::numbers::sqrt2;

struct ChshCoefficients {
    double x0 = 0.0;
    double y0 = 0.0;
    double x2 = 0.0;
    double y2 = 0.0;
    double omega0 = 0.0;  // radians
    double omega2 = 0.0;  // radians
    double s_opt = 0.0;
};

struct StateOneParams {
    double theta = 0.0;  // [0, pi]
    double phi = 0.0;    // [0, 2pi)
};

struct ResourceDecomposition {
    double q0 = 0.0;
    double q1 = 0.0;
    double r1 = 0.0;
    double r2 = 0.0;
    double r3 = 0.0;
    double r4 = 0.0;
    double s_plus = 0.0;
    double s_minus = 0.0;
};

struct KcbsReport {
    int n = 5;
    double s_kcbs = 0.0;
    double p2 = 0.0;
    double classical_bound = 0.0;
    double margin = 0.0;
};

struct Margins {
    double chsh = 0.0;
    double kcbs = 0.0;
};

namespace detail {

// Alice-side bilinear forms D_fk for the cos w and sin w parts of R(w):
//   cos part: c0f* c0k - c1f* c1k,   sin part: c0f* c1k + c1f* c0k.
struct AliceForms {
    std::array<std::array<cplx, 3>, 3> cos_part{};
    std::array<std::array<cplx, 3>, 3> sin_part{};
};

inline AliceForms alice_forms(const JointState& s) {
    AliceForms d;
    for (std::size_t f = 0; f < 3; ++f)
        for (std::size_t k = 0; k < 3; ++k) {
            d.cos_part[f][k] = std::conj(s.amp(0, f)) * s.amp(0, k) - std::conj(s.amp(1, f)) * s.amp(1, k);
            d.sin_part[f][k] = std::conj(s.amp(0, f)) * s.amp(1, k) + std::conj(s.amp(1, f)) * s.amp(0, k);
        }
    return d;
}

// Contractions of D against Bob's operators (both have the sparsity pattern
// of B0 and BmBm1): W0 = D00 - D22, W1 = D11, W2 = D02 + D20.
struct WTerms {
    double w0, w1, w2;
};

inline WTerms w_terms(const std::array<std::array<cplx, 3>, 3>& d) {
    return {(d[0][0] - d[2][2]).real(), d[1][1].real(), (d[0][2] + d[2][0]).real()};
}

// The maximizing angle of x cos w + y sin w.
inline double optimal_angle(double x, double y) {
    if (x == 0.0 && y == 0.0) return 0.0;
    return std::atan2(y, x);
}

inline void require_normalized(const JointState& s) {
    const double n2 = norm_squared(s.span());
    if (std::abs(n2 - 1.0) > JointState::kNormTol)
        throw Error(ErrorCode::NotNormalized, "state norm^2 = " + std::to_string(n2));
}

}  // namespace detail

inline ChshCoefficients chsh_coefficients(const JointState& state, int n) {
    detail::require_normalized(state);
    const auto g = cycle_geometry(n);
    const double c = g.c;
    const double sq = std::sqrt(c) / (1.0 + c);
    const double s_minus = 4.0 * g.parity() * g.s2 - 2.0;
    const double s_plus = 4.0 * g.parity() * g.s2 + 2.0;

    // Coefficients of W0, W1, W2 in <R(w) x (BmBm1 -/+ B0)>.
    const double a0 = -2.0 * c / (1.0 + c), a1 = 2.0, a2 = sq * s_minus;
    const double b0 = (2.0 - 4.0 * c) / (1.0 + c), b1 = 0.0, b2 = sq * s_plus;

    const auto d = detail::alice_forms(state);
    const auto wc = detail::w_terms(d.cos_part);
    const auto ws = detail::w_terms(d.sin_part);

    ChshCoefficients out;
    out.x0 = a0 * wc.w0 + a1 * wc.w1 + a2 * wc.w2;
    out.y0 = a0 * ws.w0 + a1 * ws.w1 + a2 * ws.w2;
    out.x2 = b0 * wc.w0 + b1 * wc.w1 + b2 * wc.w2;
    out.y2 = b0 * ws.w0 + b1 * ws.w1 + b2 * ws.w2;
    out.omega0 = detail::optimal_angle(out.x0, out.y0);
    out.omega2 = detail::optimal_angle(out.x2, out.y2);
    out.s_opt = std::hypot(out.x0, out.y0) + std::hypot(out.x2, out.y2);
    return out;
}

inline double chsh_value(const ChshCoefficients& k, double omega0, double omega2) {
    return k.x0 * std::cos(omega0) + k.y0 * std::sin(omega0) + k.x2 * std::cos(omega2) +
           k.y2 * std::sin(omega2);
}

inline double chsh_value(const JointState& state, int n, double omega0, double omega2) {
    return chsh_value(chsh_coefficients(state, n), omega0, omega2);
}

/// Full CHSH operator on C^2 x C^3 at the given settings.
inline ComplexMatrix chsh_operator(int n, double omega0, double omega2) {
    const auto b0 = b0_closed_form(n).matrix;
    const auto bb = bm_bm1_closed_form(n).matrix;
    return tensor(alice_rotation(omega2).matrix, bb + b0) +
           tensor(alice_rotation(omega0).matrix, bb - b0);
}

inline double p2_population(const JointState& s) {
    return std::norm(s.amp(0, 2)) + std::norm(s.amp(1, 2));
}

inline double p2_threshold(int n) {
    const auto g = cycle_geometry(n);
    return (n * g.c - 1.0 - g.c) / ((2.0 * g.c - 1.0) * n);
}

inline KcbsReport kcbs_value(const JointState& state, int n) {
    detail::require_normalized(state);
    const auto g = cycle_geometry(n);
    KcbsReport r;
    r.n = n;
    r.p2 = p2_population(state);
    r.s_kcbs = n * (4.0 * g.c - 2.0) / (1.0 + g.c) * r.p2 + g.lambda1;
    r.classical_bound = n - 2.0;
    r.margin = r.s_kcbs - r.classical_bound;
    return r;
}

/// sin(theta/2)|00> + cos(theta/2) e^{i phi}|12>.
inline JointState state1(const StateOneParams& p) {
    std::array<cplx, 6> a{};
    a[0] = std::sin(p.theta / 2.0);
    a[5] = std::polar(std::cos(p.theta / 2.0), p.phi);
    return JointState(a);
}

/// Closed-form CHSH (optimized over Alice's settings) and KCBS margins for state1.
inline Margins state1_margins(const StateOneParams& p, int n) {
    const auto g = cycle_geometry(n);
    const double c = g.c;
    const double coh = std::sin(p.theta) * std::cos(p.phi);
    const double s_minus = 4.0 * g.parity() * g.s2 - 2.0;
    const double s_plus = 4.0 * g.parity() * g.s2 + 2.0;
    const double t0 = std::sqrt(4.0 * c * c + c * coh * coh * s_minus * s_minus);
    const double t2 = std::sqrt((2.0 - 4.0 * c) * (2.0 - 4.0 * c) + c * coh * coh * s_plus * s_plus);
    const double half = std::cos(p.theta / 2.0);
    Margins m;
    m.chsh = (t0 + t2) / (1.0 + c) - 2.0;
    m.kcbs = n / (1.0 + c) * ((4.0 * c - 2.0) * half * half - 2.0 * c) + 2.0;
    return m;
}

/// Population / coherence / geometry split. Geometry factors need n.
inline ResourceDecomposition decompose(const JointState& s, int n) {
    detail::require_normalized(s);
    const auto g = cycle_geometry(n);
    auto re = [](cplx a, cplx b) { return (std::conj(a) * b).real(); };
    const cplx c00 = s.amp(0, 0), c01 = s.amp(0, 1), c02 = s.amp(0, 2);
    const cplx c10 = s.amp(1, 0), c11 = s.amp(1, 1), c12 = s.amp(1, 2);
    ResourceDecomposition d;
    d.q0 = std::norm(c00) - std::norm(c10) - std::norm(c02) + std::norm(c12);
    d.q1 = std::norm(c01) - std::norm(c11);
    d.r1 = re(c00, c02) - re(c10, c12);
    d.r2 = re(c10, c00) - re(c12, c02);
    d.r3 = re(c12, c00) + re(c02, c10);
    d.r4 = re(c11, c01);
    d.s_plus = 4.0 * g.parity() * g.s2 + 2.0;
    d.s_minus = 4.0 * g.parity() * g.s2 - 2.0;
    return d;
}

/// CHSH coefficients rebuilt from a decomposition (the population/coherence form).
inline ChshCoefficients coefficients_from_decomposition(const ResourceDecomposition& d, int n) {
    const double c = cycle_geometry(n).c;
    const double k = 2.0 * std::sqrt(c) / (1.0 + c);
    ChshCoefficients out;
    out.x0 = -2.0 * c / (1.0 + c) * d.q0 + 2.0 * d.q1 + k * d.r1 * d.s_minus;
    out.y0 = -4.0 * c / (1.0 + c) * d.r2 + 4.0 * d.r4 + k * d.r3 * d.s_minus;
    out.x2 = (2.0 - 4.0 * c) / (1.0 + c) * d.q0 + k * d.r1 * d.s_plus;
    out.y2 = (4.0 - 8.0 * c) / (1.0 + c) * d.r2 + k * d.r3 * d.s_plus;
    out.omega0 = detail::optimal_angle(out.x0, out.y0);
    out.omega2 = detail::optimal_angle(out.x2, out.y2);
    out.s_opt = std::hypot(out.x0, out.y0) + std::hypot(out.x2, out.y2);
    return out;
}

/// sqrt(2/(n+4))|00> + sqrt((n+2)/(n+4)) e^{i k pi}|12>.
inline JointState psi_n_state(int n, int k) {
    validate_cycle(n);
    std::array<cplx, 6> a{};
    a[0] = std::sqrt(2.0 / (n + 4.0));
    a[5] = std::sqrt((n + 2.0) / (n + 4.0)) * ((k % 2 == 0) ? 1.0 : -1.0);
    return JointState(a);
}

/// Exact margins of psi_n_state, via the state1 parametrization.
inline Margins psi_n_margins(int n) {
    validate_cycle(n);
    const double theta = 2.0 * std::acos(std::sqrt((n + 2.0) / (n + 4.0)));
    return state1_margins({theta, 0.0}, n);
}

/// Leading-order large-n margins: KCBS 8/(n+4), CHSH 8(n+2)/(n+4)^2.
inline Margins asymptotic_margins(int n) {
    validate_cycle(n);
    const double d = n + 4.0;
    return {8.0 * (n + 2.0) / (d * d), 8.0 / d};
}

inline double theta_opt_asymptotic(int n) {
    validate_cycle(n);
    return std::sqrt(8.0 / (n + 4.0));
}

/// Upper edge 2 sqrt(2) / sqrt(n) of the small-angle joint-violation window.
inline double coexistence_window(int n) {
    validate_cycle(n);
    return 2.0 * std::numbers::sqrt2 / std::sqrt(static_cast<double>(n));
}

}  // namespace coexist
