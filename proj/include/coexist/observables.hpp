// n-cycle KCBS vectors and observables, Alice's XZ-plane rotations, and the
// closed-form Bob operators entering the CHSH and KCBS expressions.
#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "coexist/error.hpp"
#include "coexist/linalg.hpp"

namespace coexist {

inline constexpr double kPi = std::numbers::pi;

/// Derived constants of an odd n-cycle.
struct CycleGeometry {
    int n = 5;
    double c = 0.0;   // cos(pi/n)
    double s2 = 0.0;  // sin(pi/2n)
    double c2 = 0.0;  // cos(pi/2n)
    int m = 2;        // (n-1)/2
    double lambda1 = 0.0;
    double lambda3 = 0.0;

    /// (-1)^m as a double.
    double parity() const noexcept { return (m % 2 == 0) ? 1.0 : -1.0; }
};

inline void validate_cycle(int n) {
    if (n < 5 || n % 2 == 0)
        throw Error(ErrorCode::InvalidCycle,
                    "cycle size must be odd and >= 5, got " + std::to_string(n));
}

inline CycleGeometry cycle_geometry(int n) {
    validate_cycle(n);
    CycleGeometry g;
    g.n = n;
    g.c = std::cos(kPi / n);
    g.s2 = std::sin(kPi / (2.0 * n));
    g.c2 = std::cos(kPi / (2.0 * n));
    g.m = (n - 1) / 2;
    g.lambda1 = n * (1.0 - g.c) / (1.0 + g.c);
    g.lambda3 = n * (3.0 * g.c - 1.0) / (1.0 + g.c);
    return g;
}

/// Labelled Hermitian matrix.
struct Observable {
    ComplexMatrix matrix;
    std::string label;
};

inline void validate_index(int n, int j) {
    validate_cycle(n);
    if (j < 0 || j >= n)
        throw Error(ErrorCode::IndexOutOfRange,
                    "cycle index " + std::to_string(j) + " outside [0, " + std::to_string(n - 1) + "]");
}

/// Unit vector |psi_j> = [cos t_j, sin t_j, sqrt(c)] / sqrt(1+c), t_j = j(n-1)pi/n.
inline std::array<double, 3> kcbs_vector(int n, int j) {
    validate_index(n, j);
    const double c = std::cos(kPi / n);
    const double t = static_cast<double>(j) * (n - 1) * kPi / n;
    const double k = 1.0 / std::sqrt(1.0 + c);
    return {k * std::cos(t), k * std::sin(t), k * std::sqrt(c)};
}

inline ComplexMatrix kcbs_projector(int n, int j) {
    const auto v = kcbs_vector(n, j);
    ComplexMatrix p(3, 3);
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 3; ++c) p(r, c) = v[r] * v[c];
    return p;
}

/// B_j = (-1)^j (2 P_j - I).
inline Observable kcbs_observable(int n, int j) {
    const double sign = (j % 2 == 0) ? 1.0 : -1.0;
    ComplexMatrix b = (2.0 * kcbs_projector(n, j) - ComplexMatrix::identity(3)) * sign;
    return {std::move(b), "B_" + std::to_string(j)};
}

inline Observable b0_closed_form(int n) {
    const auto g = cycle_geometry(n);
    const double c = g.c;
    const double d = (1.0 - c) / (1.0 + c);
    const double off = 2.0 * std::sqrt(c) / (1.0 + c);
    return {ComplexMatrix{{d, 0.0, off}, {0.0, -1.0, 0.0}, {off, 0.0, -d}}, "B_0"};
}

inline Observable bm_bm1_closed_form(int n) {
    const auto g = cycle_geometry(n);
    const double c = g.c;
    const double d = (1.0 - 3.0 * c) / (1.0 + c);
    const double off = 4.0 * g.parity() * g.s2 * std::sqrt(c) / (1.0 + c);
    return {ComplexMatrix{{d, 0.0, off}, {0.0, 1.0, 0.0}, {off, 0.0, -d}},
            "B_" + std::to_string(g.m) + "B_" + std::to_string(g.m + 1)};
}

/// Context correlator B_j B_{j+1 mod n}.
inline Observable kcbs_pair(int n, int j) {
    validate_index(n, j);
    const int next = (j + 1) % n;
    return {kcbs_observable(n, j).matrix * kcbs_observable(n, next).matrix,
            "B_" + std::to_string(j) + "B_" + std::to_string(next)};
}

/// Sign with which the context (j, j+1) enters the KCBS sum: -1 for the
/// wraparound pair (n-1, 0), +1 otherwise.
inline double kcbs_cycle_sign(int n, int j) {
    validate_index(n, j);
    return j == n - 1 ? -1.0 : 1.0;
}

/// R(w) = Z cos w + X sin w.
inline Observable alice_rotation(double omega) {
    const double c = std::cos(omega);
    const double s = std::sin(omega);
    return {ComplexMatrix{{c, s}, {s, -c}}, "R(" + std::to_string(omega) + ")"};
}

/// KCBS operator in its diagonal form diag(lambda1, lambda1, lambda3).
inline Observable s_operator(int n) {
    const auto g = cycle_geometry(n);
    return {ComplexMatrix::diagonal({g.lambda1, g.lambda1, g.lambda3}), "S"};
}

/// sum_{j<n-1} B_j B_{j+1} - B_{n-1} B_0 assembled from the individual observables.
inline ComplexMatrix kcbs_operator_assembled(int n) {
    validate_cycle(n);
    ComplexMatrix sum(3, 3);
    for (int j = 0; j < n; ++j) sum += kcbs_pair(n, j).matrix * kcbs_cycle_sign(n, j);
    return sum;
}

/// 4 sum_j P_j - n I.
inline ComplexMatrix kcbs_operator_from_projectors(int n) {
    validate_cycle(n);
    ComplexMatrix sum(3, 3);
    for (int j = 0; j < n; ++j) sum += kcbs_projector(n, j);
    return 4.0 * sum - static_cast<double>(n) * ComplexMatrix::identity(3);
}

}  // namespace coexist
