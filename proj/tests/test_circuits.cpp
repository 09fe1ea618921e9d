#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "coexist/circuits.hpp"
#include "coexist/validation.hpp"
#include "oracles.hpp"

using namespace coexist;
using Catch::Approx;

namespace {

ComplexMatrix expm_series(const ComplexMatrix& a) {
    ComplexMatrix term = ComplexMatrix::identity(a.rows());
    ComplexMatrix sum = term;
    for (int k = 1; k < 40; ++k) {
        term = term * a * (1.0 / k);
        sum += term;
    }
    return sum;
}

double exact_correlator(const ComplexMatrix& a2, const ComplexMatrix& b3, const JointState& s) {
    return expectation(s, tensor(a2, b3));
}

}  // namespace

TEST_CASE("Gell-Mann matrices: Hermitian, traceless, orthonormal", "[circuits]") {
    for (int a = 1; a <= 8; ++a) {
        const auto la = gell_mann(a);
        CHECK(is_hermitian(la));
        CHECK(std::abs(la.trace()) < 1e-15);
        for (int b = 1; b <= 8; ++b) {
            const cplx tr = (la * gell_mann(b)).trace();
            CHECK(std::abs(tr - (a == b ? 2.0 : 0.0)) < 1e-14);
        }
    }
    CHECK_THROWS_AS(gell_mann(0), Error);
    CHECK_THROWS_AS(gell_mann(9), Error);
}

TEST_CASE("subspace Z generators", "[circuits]") {
    CHECK(max_abs_diff(subspace_generator(Subspace::L02, Axis::Z), ComplexMatrix::diagonal({1, 0, -1})) < 1e-15);
    CHECK(max_abs_diff(subspace_generator(Subspace::L12, Axis::Z), ComplexMatrix::diagonal({0, 1, -1})) < 1e-15);
    CHECK(max_abs_diff(subspace_generator(Subspace::L01, Axis::Z), ComplexMatrix::diagonal({1, -1, 0})) < 1e-15);
}

TEST_CASE("closed-form rotations equal exp(-i theta/2 lambda)", "[circuits][property]") {
    const cplx mi{0.0, -1.0};
    for (auto s : {Subspace::L01, Subspace::L02, Subspace::L12})
        for (auto ax : {Axis::X, Axis::Y, Axis::Z})
            for (double theta : {-2.1, -0.3, 0.0, 0.7, 1.9, 3.0}) {
                const auto closed = rotation(s, ax, theta);
                const auto lam = subspace_generator(s, ax);
                const auto series = expm_series(lam * (mi * (theta / 2.0)));
                CHECK(max_abs_diff(closed, series) < 1e-12);
                CHECK(is_unitary(closed));
            }
}

TEST_CASE("named gates", "[circuits]") {
    CHECK(is_unitary(f3()));
    CHECK(max_abs_diff(f3() * f3() * f3() * f3(), ComplexMatrix::identity(3)) < 1e-14);
    CHECK(max_abs_diff(x02() * x02(), ComplexMatrix::identity(3)) < 1e-15);
    const auto d = phase_gate(0.4, -1.1);
    CHECK(std::abs(d(1, 1) - std::polar(1.0, 0.4)) < 1e-15);
    CHECK(std::abs(d(2, 2) - std::polar(1.0, -1.1)) < 1e-15);
    CHECK(std::abs(d(0, 0) - 1.0) < 1e-15);

    const auto cx = controlled_power(x02());
    CHECK(cx.rows() == 9);
    CHECK(is_unitary(cx));
    // |1 0> -> |1 2>, |2 0> -> |2 0>
    CHECK(std::abs(cx(3 + 2, 3 + 0) - 1.0) < 1e-15);
    CHECK(std::abs(cx(6 + 0, 6 + 0) - 1.0) < 1e-15);

    try {
        (void)controlled_power(gell_mann(1));
        FAIL("non-unitary accepted");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotUnitary);
    }
}

TEST_CASE("register: gates on non-adjacent and reversed targets", "[circuits]") {
    // X02 on register 2 of three: |000> -> |002>.
    QutritRegister reg(3);
    reg.apply(x02(), {2});
    CHECK(std::abs(reg.amplitudes()[2] - 1.0) < 1e-15);

    // Controlled gate with control on register 2, target on register 0.
    reg.apply(controlled_power(x02()), {2, 0});
    // control level 2 applies X02^2 = I, so nothing moves.
    CHECK(std::abs(reg.amplitudes()[2] - 1.0) < 1e-15);
    reg.apply(x02(), {2});
    reg.apply(rotation(Subspace::L01, Axis::Y, kPi), {2});  // |0> -> |1>
    reg.apply(controlled_power(x02()), {2, 0});
    // |001> -> |201>
    CHECK(std::abs(std::abs(reg.amplitudes()[18 + 1]) - 1.0) < 1e-14);
    CHECK(reg.norm() == Approx(1.0).margin(1e-14));

    CHECK_THROWS_AS(reg.apply(x02(), {3}), Error);
    CHECK_THROWS_AS(reg.apply(controlled_power(x02()), {1, 1}), Error);
    CHECK_THROWS_AS(reg.apply(x02(), {0, 1}), Error);
    CHECK_THROWS_AS(reg.apply(gell_mann(3), {0}), Error);
}

TEST_CASE("state preparation circuit", "[circuits]") {
    const double theta = 49.605 * kPi / 180.0;
    const auto s = prepare_state1(theta, 0.0);
    CHECK(s.amp(0, 0).real() == Approx(0.4194916913).margin(1e-9));
    CHECK(s.amp(1, 2).real() == Approx(0.9077591756).margin(1e-9));

    for (double t = 0.0; t <= kPi + 1e-9; t += kPi / 11.0)
        for (double phi = 0.0; phi < 2.0 * kPi; phi += kPi / 5.0)
            CHECK(fidelity(prepare_state1(t, phi), state1({t, phi})) > 1.0 - 1e-12);

    const auto spec = state1_circuit(1.0, 0.5);
    REQUIRE(spec.gates.size() == 3);
    CHECK(spec.gates[2].targets == std::vector<std::size_t>{0, 1});
}

TEST_CASE("dead-level guard", "[circuits]") {
    CircuitSpec bad;
    bad.registers = {"alice", "bob"};
    bad.gates.push_back({"X02", x02(), {0}});
    QutritRegister reg(2);
    try {
        run_circuit(bad, reg, 0);
        FAIL("dead level populated without error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DimensionMismatch);
    }
    QutritRegister ok(2);
    CHECK_NOTHROW(run_circuit(bad, ok));
}

TEST_CASE("Fourier test probabilities follow from <U>", "[circuits][property]") {
    std::mt19937_64 gen(404);
    std::uniform_real_distribution<double> ang(-kPi, kPi);
    for (int t = 0; t < 60; ++t) {
        const int n = 5 + 2 * (t % 4);
        const auto s = random_joint_state(gen);
        const auto a = alice_rotation(ang(gen)).matrix;
        const auto b = kcbs_observable(n, t % n).matrix;
        const auto r = fourier_test(a, b, s);
        const double u = exact_correlator(a, b, s);
        CHECK(std::abs(r.p0 - (5.0 + 4.0 * u) / 9.0) < 1e-12);
        CHECK(std::abs(r.p1 - (2.0 - 2.0 * u) / 9.0) < 1e-12);
        CHECK(std::abs(r.p2 - r.p1) < 1e-12);
        CHECK(std::abs(r.p0 + r.p1 + r.p2 - 1.0) < 1e-12);
        CHECK(std::abs(r.estimator_combined - u) < 1e-10);
        CHECK(std::abs(r.estimator_p0 - u) < 1e-10);
        CHECK(std::abs(r.estimator_p1 - u) < 1e-10);
    }
}

TEST_CASE("Fourier test on Bob-only context correlators", "[circuits]") {
    const auto s = state1({1.2, 0.3});
    const auto id = ComplexMatrix::identity(2);
    for (int j = 0; j < 5; ++j) {
        const auto bb = kcbs_pair(5, j).matrix;
        CHECK(std::abs(fourier_test(id, bb, s).estimator_combined - exact_correlator(id, bb, s)) < 1e-10);
    }
}

TEST_CASE("Fourier test rejects bad inputs", "[circuits]") {
    const std::vector<cplx> psi3{1.0, 0.0, 0.0};
    const std::vector<cplx> psi2{1.0, 0.0};
    const std::vector<cplx> unnorm{1.0, 1.0, 0.0};
    auto code_of = [](auto&& f) {
        try {
            f();
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::Io;
    };
    CHECK(code_of([&] { fourier_test_probabilities(x02(), psi2); }) == ErrorCode::DimensionMismatch);
    CHECK(code_of([&] { fourier_test_probabilities(ComplexMatrix::identity(2), psi2); }) ==
          ErrorCode::DimensionMismatch);
    CHECK(code_of([&] { fourier_test_probabilities(f3(), psi3); }) == ErrorCode::NotHermitian);
    CHECK(code_of([&] { fourier_test_probabilities(gell_mann(1), psi3); }) == ErrorCode::NotUnitary);
    CHECK(code_of([&] { fourier_test_probabilities(x02(), unnorm); }) == ErrorCode::NotNormalized);
    CHECK(code_of([&] { (void)fourier_test(ComplexMatrix::identity(3), x02(), JointState{}); }) ==
          ErrorCode::DimensionMismatch);
}

TEST_CASE("shot sampling", "[circuits]") {
    const auto s = state1({kPi / 2.0, 0.0});
    const auto k = chsh_coefficients(s, 5);
    const auto exact = fourier_test(alice_rotation(k.omega2).matrix, b0_closed_form(5).matrix, s);

    const auto a = sample_shots(exact, 10000, 42);
    const auto b = sample_shots(exact, 10000, 42);
    REQUIRE(a.counts);
    CHECK(*a.counts == *b.counts);
    CHECK((*a.counts)[0] + (*a.counts)[1] + (*a.counts)[2] == 10000u);
    CHECK(a.seed == 42u);
    CHECK(a.p0 == exact.p0);  // exact probabilities carried through

    const auto c = sample_shots(exact, 10000, 43);
    CHECK(*c.counts != *a.counts);

    // Mean of many runs sits within a few standard errors of the truth.
    const std::uint64_t shots = 2000;
    const double se = combined_standard_error(exact, shots);
    double sum = 0.0;
    const int runs = 400;
    for (int i = 0; i < runs; ++i) sum += sample_shots(exact, shots, derive_seed(9, i)).estimator_combined;
    CHECK(std::abs(sum / runs - exact.estimator_combined) < 5.0 * se / std::sqrt(runs));

    CHECK_THROWS_AS(sample_shots(exact, 0, 1), Error);
}

TEST_CASE("degenerate distributions sample exactly", "[circuits]") {
    // |12> with Z x I: <U> = -1, so P0 = 1/9, P1 = P2 = 4/9.
    const auto s = JointState::basis(1, 2);
    const auto r = fourier_test(alice_rotation(0.0).matrix, ComplexMatrix::identity(3), s);
    CHECK(r.p0 == Approx(1.0 / 9.0).margin(1e-14));
    // <U> = +1 gives P0 = 1 and no randomness at all.
    const auto one = fourier_test(ComplexMatrix::identity(2), ComplexMatrix::identity(3), s);
    const auto sampled = sample_shots(one, 1000, 5);
    CHECK((*sampled.counts)[0] == 1000u);
    CHECK(sampled.estimator_combined == Approx(1.0));
    CHECK(combined_standard_error(one, 1000) == Approx(0.0).margin(1e-7));
}

TEST_CASE("seed derivation", "[circuits]") {
    static_assert(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(7, 3) == derive_seed(7, 3));
    CHECK(derive_seed(7, 3) != derive_seed(8, 3));
}
