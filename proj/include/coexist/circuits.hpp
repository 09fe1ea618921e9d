// Qutrit gate library and exact statevector simulation of the state
// preparation circuit and the ancilla Fourier test.
//
// Register layout: qutrit registers in order (ancilla, Alice, Bob); register
// 0 is the most significant digit of the basis index. Alice lives on levels
// {0, 1} of her qutrit; level 2 must stay unpopulated.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "coexist/analytic.hpp"
#include "coexist/error.hpp"
#include "coexist/linalg.hpp"
#include "coexist/observables.hpp"

namespace coexist {

inline constexpr double kGateUnitaryTol = 1e-10;
inline constexpr double kDeadLevelTol = 1e-12;

// ---------------------------------------------------------------------------
// gate library

inline ComplexMatrix gell_mann(int a) {
    const cplx i{0.0, 1.0};
    const double r3 = 1.0 / std::sqrt(3.0);
    switch (a) {
        case 1: return {{0, 1, 0}, {1, 0, 0}, {0, 0, 0}};
        case 2: return {{0, -i, 0}, {i, 0, 0}, {0, 0, 0}};
        case 3: return {{1, 0, 0}, {0, -1, 0}, {0, 0, 0}};
        case 4: return {{0, 0, 1}, {0, 0, 0}, {1, 0, 0}};
        case 5: return {{0, 0, -i}, {0, 0, 0}, {i, 0, 0}};
        case 6: return {{0, 0, 0}, {0, 0, 1}, {0, 1, 0}};
        case 7: return {{0, 0, 0}, {0, 0, -i}, {0, i, 0}};
        case 8: return {{r3, 0, 0}, {0, r3, 0}, {0, 0, -2.0 * r3}};
        default:
            throw Error(ErrorCode::IndexOutOfRange,
                        "Gell-Mann index must be in [1, 8], got " + std::to_string(a));
    }
}

enum class Subspace { L01, L02, L12 };
enum class Axis { X, Y, Z };

/// Levels (lo, hi) addressed by a subspace.
constexpr std::pair<std::size_t, std::size_t> levels(Subspace s) noexcept {
    switch (s) {
        case Subspace::L01: return {0, 1};
        case Subspace::L02: return {0, 2};
        case Subspace::L12: return {1, 2};
    }
    return {0, 1};
}

/// Generator lambda_axis^(ij) as listed for the three two-level subspaces.
inline ComplexMatrix subspace_generator(Subspace s, Axis axis) {
    static constexpr int xs[] = {1, 4, 6};
    static constexpr int ys[] = {2, 5, 7};
    const int idx = static_cast<int>(s);
    switch (axis) {
        case Axis::X: return gell_mann(xs[idx]);
        case Axis::Y: return gell_mann(ys[idx]);
        case Axis::Z: break;
    }
    const double r3 = std::sqrt(3.0);
    switch (s) {
        case Subspace::L01: return gell_mann(3);
        case Subspace::L02: return 0.5 * (gell_mann(3) + r3 * gell_mann(8));
        case Subspace::L12: return 0.5 * (-gell_mann(3) + r3 * gell_mann(8));
    }
    return gell_mann(3);
}

/// exp(-i theta/2 lambda) in closed form: an SU(2) rotation on the
/// subspace levels, identity on the spectator level.
inline ComplexMatrix rotation(Subspace s, Axis axis, double theta) {
    const auto [lo, hi] = levels(s);
    const double c = std::cos(theta / 2.0);
    const double sn = std::sin(theta / 2.0);
    const cplx i{0.0, 1.0};
    ComplexMatrix r = ComplexMatrix::identity(3);
    switch (axis) {
        case Axis::X:
            r(lo, lo) = c; r(lo, hi) = -i * sn;
            r(hi, lo) = -i * sn; r(hi, hi) = c;
            break;
        case Axis::Y:
            r(lo, lo) = c; r(lo, hi) = -sn;
            r(hi, lo) = sn; r(hi, hi) = c;
            break;
        case Axis::Z:
            r(lo, lo) = std::polar(1.0, -theta / 2.0);
            r(hi, hi) = std::polar(1.0, theta / 2.0);
            break;
    }
    return r;
}

/// D(alpha, beta) = diag(1, e^{i alpha}, e^{i beta}).
inline ComplexMatrix phase_gate(double alpha, double beta) {
    return ComplexMatrix::diagonal({1.0, std::polar(1.0, alpha), std::polar(1.0, beta)});
}

/// Qutrit Fourier transform, entries w^{jk}/sqrt(3) with w = e^{2 pi i/3}.
inline ComplexMatrix f3() {
    ComplexMatrix f(3, 3);
    const double norm = 1.0 / std::sqrt(3.0);
    for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t k = 0; k < 3; ++k)
            f(j, k) = std::polar(norm, 2.0 * kPi * static_cast<double>((j * k) % 3) / 3.0);
    return f;
}

/// Swap of levels 0 and 2.
inline ComplexMatrix x02() { return {{0, 0, 1}, {0, 1, 0}, {1, 0, 0}}; }

/// |a>|psi> -> |a> U^a |psi>: block diag(I, U, U^2) with a 3-level control.
inline ComplexMatrix controlled_power(const ComplexMatrix& u) {
    if (!u.is_square() || !is_unitary(u, kGateUnitaryTol))
        throw Error(ErrorCode::NotUnitary, "controlled_power: target operator is not unitary");
    const std::size_t d = u.rows();
    const ComplexMatrix blocks[3] = {ComplexMatrix::identity(d), u, u * u};
    ComplexMatrix out(3 * d, 3 * d);
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t r = 0; r < d; ++r)
            for (std::size_t c = 0; c < d; ++c) out(a * d + r, a * d + c) = blocks[a](r, c);
    return out;
}

/// Direct sum R ⊕ 1: places a 2x2 Alice operator on levels {0,1} of a qutrit.
inline ComplexMatrix embed_alice(const ComplexMatrix& a2) {
    if (a2.rows() != 2 || a2.cols() != 2)
        throw Error(ErrorCode::DimensionMismatch, "embed_alice expects a 2x2 operator");
    ComplexMatrix out = ComplexMatrix::identity(3);
    for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t c = 0; c < 2; ++c) out(r, c) = a2(r, c);
    return out;
}

/// Joint qubit-qutrit amplitudes lifted to the 9-dim (Alice qutrit) x (Bob qutrit) space.
inline std::vector<cplx> embed_joint_state(const JointState& s) {
    std::vector<cplx> v(9, cplx{});
    for (std::size_t j = 0; j < 2; ++j)
        for (std::size_t k = 0; k < 3; ++k) v[3 * j + k] = s.amp(j, k);
    return v;
}

// ---------------------------------------------------------------------------
// statevector simulator

/// Statevector over a fixed number of qutrit registers.
class QutritRegister {
public:
    explicit QutritRegister(std::size_t num_qutrits)
        : num_(num_qutrits), amps_(pow3(num_qutrits), cplx{}) {
        if (num_qutrits == 0) throw Error(ErrorCode::DimensionMismatch, "need at least one qutrit");
        amps_[0] = 1.0;
    }

    QutritRegister(std::size_t num_qutrits, std::vector<cplx> amps)
        : num_(num_qutrits), amps_(std::move(amps)) {
        if (amps_.size() != pow3(num_qutrits))
            throw Error(ErrorCode::DimensionMismatch, "amplitude count is not 3^k");
    }

    std::size_t num_qutrits() const noexcept { return num_; }
    std::span<const cplx> amplitudes() const noexcept { return amps_; }

    /// Applies `gate` (dimension 3^targets.size()) to the listed registers;
    /// targets[0] is the most significant digit of the gate's index.
    void apply(const ComplexMatrix& gate, std::span<const std::size_t> targets) {
        if (!is_unitary(gate, kGateUnitaryTol))
            throw Error(ErrorCode::NotUnitary, "gate is not unitary");
        apply_unchecked(gate, targets);
    }

    void apply(const ComplexMatrix& gate, std::initializer_list<std::size_t> targets) {
        apply(gate, std::span<const std::size_t>(targets.begin(), targets.size()));
    }

    /// As apply(), minus the unitarity check; the caller vouches for `gate`.
    void apply_unchecked(const ComplexMatrix& gate, std::span<const std::size_t> targets) {
        const std::size_t k = targets.size();
        const std::size_t gd = pow3(k);
        if (gate.rows() != gd || gate.cols() != gd)
            throw Error(ErrorCode::DimensionMismatch, "gate size does not match target count");
        for (std::size_t i = 0; i < k; ++i) {
            if (targets[i] >= num_)
                throw Error(ErrorCode::IndexOutOfRange, "target register out of range");
            for (std::size_t j = 0; j < i; ++j)
                if (targets[j] == targets[i])
                    throw Error(ErrorCode::IndexOutOfRange, "repeated target register");
        }

        std::vector<std::size_t> stride(k);
        for (std::size_t i = 0; i < k; ++i) stride[i] = pow3(num_ - 1 - targets[i]);

        // offsets[g] = index contribution of gate basis state g
        std::vector<std::size_t> offsets(gd, 0);
        for (std::size_t g = 0; g < gd; ++g) {
            std::size_t rem = g;
            for (std::size_t i = k; i-- > 0;) {
                offsets[g] += (rem % 3) * stride[i];
                rem /= 3;
            }
        }

        std::vector<cplx> in(gd), out(gd);
        for (std::size_t base = 0; base < amps_.size(); ++base) {
            bool is_base = true;
            for (std::size_t i = 0; i < k && is_base; ++i)
                if ((base / stride[i]) % 3 != 0) is_base = false;
            if (!is_base) continue;
            for (std::size_t g = 0; g < gd; ++g) in[g] = amps_[base + offsets[g]];
            for (std::size_t r = 0; r < gd; ++r) {
                cplx acc{};
                for (std::size_t c = 0; c < gd; ++c) acc += gate(r, c) * in[c];
                out[r] = acc;
            }
            for (std::size_t g = 0; g < gd; ++g) amps_[base + offsets[g]] = out[g];
        }
    }

    /// Probability of each level of one register.
    std::array<double, 3> marginal(std::size_t reg) const {
        std::array<double, 3> p{};
        const std::size_t stride = pow3(num_ - 1 - reg);
        for (std::size_t i = 0; i < amps_.size(); ++i) p[(i / stride) % 3] += std::norm(amps_[i]);
        return p;
    }

    double norm() const { return std::sqrt(norm_squared(amps_)); }

private:
    static std::size_t pow3(std::size_t k) {
        std::size_t p = 1;
        while (k--) p *= 3;
        return p;
    }

    std::size_t num_;
    std::vector<cplx> amps_;
};

/// One named gate application inside a circuit.
struct GateOp {
    std::string name;
    ComplexMatrix matrix;
    std::vector<std::size_t> targets;
};

/// Ordered gate list over named qutrit registers.
struct CircuitSpec {
    std::vector<std::string> registers;
    std::vector<GateOp> gates;
};

/// Runs `spec` from `reg`; after every gate checks that level 2 of
/// `dead_level_register` (if given) is unpopulated.
inline void run_circuit(const CircuitSpec& spec, QutritRegister& reg,
                        std::optional<std::size_t> dead_level_register = std::nullopt) {
    if (spec.registers.size() != reg.num_qutrits())
        throw Error(ErrorCode::DimensionMismatch, "circuit register count mismatch");
    for (const auto& op : spec.gates) {
        reg.apply(op.matrix, op.targets);
        if (dead_level_register && reg.marginal(*dead_level_register)[2] > kDeadLevelTol)
            throw Error(ErrorCode::DimensionMismatch,
                        "gate " + op.name + " populated the dead level of register " +
                            spec.registers[*dead_level_register]);
    }
}

/// Three-gate circuit on (Alice, Bob) preparing
/// sin(theta/2)|00> + cos(theta/2) e^{i phi}|12> from |00>.
inline CircuitSpec state1_circuit(double theta, double phi) {
    CircuitSpec c;
    c.registers = {"alice", "bob"};
    c.gates.push_back({"R01y(pi-theta)", rotation(Subspace::L01, Axis::Y, kPi - theta), {0}});
    c.gates.push_back({"D(phi,0)", phase_gate(phi, 0.0), {0}});
    c.gates.push_back({"C-X02", controlled_power(x02()), {0, 1}});
    return c;
}

inline JointState prepare_state1(double theta, double phi) {
    QutritRegister reg(2);
    run_circuit(state1_circuit(theta, phi), reg, 0);
    const auto amps = reg.amplitudes();
    std::array<cplx, 6> a{};
    for (std::size_t i = 0; i < 6; ++i) a[i] = amps[i];
    return JointState(a);
}

/// |<a|b>|
inline double fidelity(const JointState& a, const JointState& b) {
    return std::abs(inner(a.span(), b.span()));
}

// ---------------------------------------------------------------------------
// Fourier test

struct FourierTestReport {
    double p0 = 0.0;
    double p1 = 0.0;
    double p2 = 0.0;
    std::optional<std::uint64_t> shots;
    std::optional<std::array<std::uint64_t, 3>> counts;
    double estimator_combined = 0.0;
    double estimator_p0 = 0.0;
    double estimator_p1 = 0.0;
    std::optional<std::uint64_t> seed;
};

namespace detail {

inline void fill_estimators(FourierTestReport& r, double f0, double f1, double f2) {
    r.estimator_p0 = (9.0 * f0 - 5.0) / 4.0;
    r.estimator_p1 = (2.0 - 9.0 * f1) / 2.0;
    r.estimator_combined = (9.0 * (f0 - f1 - f2) - 1.0) / 8.0;
}

}  // namespace detail

/// Simulates F3 -> controlled-U^a -> F3^dagger on (ancilla, target) and
/// returns the exact ancilla distribution.
inline FourierTestReport fourier_test_probabilities(const ComplexMatrix& u, std::span<const cplx> psi) {
    if (!u.is_square() || u.rows() != psi.size())
        throw Error(ErrorCode::DimensionMismatch, "fourier test: operator/state size mismatch");
    if (!is_hermitian(u, kGateUnitaryTol)) throw Error(ErrorCode::NotHermitian, "fourier test: U not Hermitian");
    if (!is_unitary(u, kGateUnitaryTol)) throw Error(ErrorCode::NotUnitary, "fourier test: U not unitary");
    if (std::abs(norm_squared(psi) - 1.0) > JointState::kNormTol)
        throw Error(ErrorCode::NotNormalized, "fourier test: input state not normalized");

    // Target must itself be a whole number of qutrits.
    std::size_t d = psi.size(), k = 0;
    while (d > 1 && d % 3 == 0) { d /= 3; ++k; }
    if (d != 1) throw Error(ErrorCode::DimensionMismatch, "fourier test: target dimension is not 3^k");

    std::vector<cplx> full(3 * psi.size(), cplx{});
    std::copy(psi.begin(), psi.end(), full.begin());
    QutritRegister reg(k + 1, std::move(full));

    std::vector<std::size_t> all(k + 1);
    for (std::size_t i = 0; i <= k; ++i) all[i] = i;
    const std::size_t ancilla[] = {0};

    // u was checked above, so the block-diagonal controlled gate is unitary too.
    reg.apply(f3(), ancilla);
    reg.apply_unchecked(controlled_power(u), all);
    reg.apply(f3().adjoint(), ancilla);

    const auto p = reg.marginal(0);
    FourierTestReport r;
    r.p0 = p[0];
    r.p1 = p[1];
    r.p2 = p[2];
    detail::fill_estimators(r, r.p0, r.p1, r.p2);
    return r;
}

/// Fourier test of A ⊗ B on a joint state, with A a 2x2 Alice operator
/// embedded on her qutrit and B a 3x3 Bob operator.
inline FourierTestReport fourier_test(const ComplexMatrix& alice2, const ComplexMatrix& bob3,
                                      const JointState& psi) {
    const auto u = tensor(embed_alice(alice2), bob3);
    const auto v = embed_joint_state(psi);
    return fourier_test_probabilities(u, v);
}

/// One standard error of the combined estimator at `shots` samples.
inline double combined_standard_error(const FourierTestReport& exact, std::uint64_t shots) {
    const double mean = exact.p0 - exact.p1 - exact.p2;
    const double var = std::max(0.0, 1.0 - mean * mean);
    return 9.0 / 8.0 * std::sqrt(var / static_cast<double>(shots));
}

/// splitmix64 finalizer; derives independent per-item seeds from a master seed.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Multinomial ancilla counts drawn from the exact distribution of `report`.
inline FourierTestReport sample_shots(const FourierTestReport& report, std::uint64_t shots,
                                      std::uint64_t seed) {
    if (shots == 0) throw Error(ErrorCode::Usage, "shots must be positive");
    std::mt19937_64 gen(seed);
    auto clamp01 = [](double x) { return std::min(1.0, std::max(0.0, x)); };
    const double p0 = clamp01(report.p0);
    const double p1 = clamp01(report.p1);

    std::array<std::uint64_t, 3> counts{};
    counts[0] = std::binomial_distribution<std::uint64_t>(shots, p0)(gen);
    const std::uint64_t rest = shots - counts[0];
    const double cond = (p0 < 1.0) ? clamp01(p1 / (1.0 - p0)) : 0.0;
    counts[1] = rest > 0 ? std::binomial_distribution<std::uint64_t>(rest, cond)(gen) : 0;
    counts[2] = rest - counts[1];

    FourierTestReport out = report;
    out.shots = shots;
    out.counts = counts;
    out.seed = seed;
    const double s = static_cast<double>(shots);
    detail::fill_estimators(out, counts[0] / s, counts[1] / s, counts[2] / s);
    return out;
}

}  // namespace coexist
