// Walks through the library on the n = 5 cycle: thresholds, the state-I
// margins, the coexistence point, and one Fourier-test estimate.
#include <cstdio>

#include "coexist/coexist.hpp"

int main() {
    using namespace coexist;
    const int n = 5;

    std::printf("p2 threshold (n=%d): %.6f\n", n, p2_threshold(n));

    const JointState bell = state1({kPi / 2.0, 0.0});
    const auto k = chsh_coefficients(bell, n);
    std::printf("state I at theta=90deg: X0=%.6f Y0=%.6f X2=%.6f Y2=%.6f  S_opt=%.6f\n", k.x0, k.y0, k.x2, k.y2,
                k.s_opt);
    std::printf("                        KCBS margin=%.6f\n", kcbs_value(bell, n).margin);

    const auto c = coexistence_point(n);
    std::printf("coexistence: theta_opt=%.4f deg, overlap=%.6f (%d bisection steps)\n", c.theta_opt_deg, c.overlap,
                c.iterations);

    const JointState psi = prepare_state1(deg_to_rad(c.theta_opt_deg), 0.0);
    const auto kc = chsh_coefficients(psi, n);
    const auto exact = fourier_test(alice_rotation(kc.omega0).matrix, b0_closed_form(n).matrix, psi);
    const auto sampled = sample_shots(exact, 100000, 7);
    std::printf("Fourier test <R(w0) x B0>: P=(%.6f, %.6f, %.6f) exact=%.6f sampled=%.6f +- %.6f\n", exact.p0,
                exact.p1, exact.p2, exact.estimator_combined, sampled.estimator_combined,
                combined_standard_error(exact, 100000));
    return 0;
}
