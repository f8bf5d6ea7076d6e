#include <doctest.h>

#include <cmath>
#include <sstream>

#include "coneflow/background.hpp"
#include "coneflow/spline.hpp"
#include "oracles.hpp"

using namespace coneflow;
using doctest::Approx;

namespace {
const GasConstants kGas{1.4};

const BackgroundTable& canonical_bg() {
    static BackgroundTable bg = solve_background(canonical_sonic_init(), kGas);
    return bg;
}

const CoefficientTable& canonical_coeffs() {
    static CoefficientTable ct = coefficients(canonical_bg());
    return ct;
}

const MultiplierTable& canonical_mult() {
    static MultiplierTable mt = build_multiplier(canonical_coeffs());
    return mt;
}
}  // namespace

TEST_CASE("background: sonic point, monotone Mach, sign conditions") {
    const BackgroundTable& bg = canonical_bg();
    CHECK(std::fabs(bg.mach_sq(bg.theta_so) - 1.0) < 1e-10);
    CHECK(bg.mach_sq(bg.theta_minus) > 1.0);
    CHECK(bg.mach_sq(bg.theta_plus) < 1.0);

    double prev = 1e300;
    for (double th : bg.grid) {
        const double msq = bg.mach_sq(th);
        CHECK(msq < prev);
        prev = msq;
        CHECK(bg.u1.eval(th) > 0.0);
        CHECK(bg.u2.eval(th) > 0.0);
        CHECK(bg.mach1(th) < 1.0);
        CHECK(bg.mach2(th) < 1.0);
        CHECK(bg.g1(th) > 0.0);
    }
}

TEST_CASE("background: d|M|^2/dtheta < 0 and the g1 quadrature identity") {
    const BackgroundTable& bg = canonical_bg();
    std::vector<double> msq(bg.dense_grid.size());
    for (std::size_t i = 0; i < bg.dense_grid.size(); ++i) msq[i] = bg.mach_sq(bg.dense_grid[i]);
    CubicSpline s_msq(bg.dense_grid, msq);
    for (double th : bg.grid) CHECK(s_msq.deriv(th) < 0.0);

    // g1' = -g1 / ((1 - M2^2) tan theta)  =>  g1 = g1(so) exp(-int ...)
    std::vector<double> integrand(bg.dense_grid.size());
    for (std::size_t i = 0; i < bg.dense_grid.size(); ++i) {
        const double th = bg.dense_grid[i];
        const double m2 = bg.mach2(th);
        integrand[i] = 1.0 / ((1.0 - m2 * m2) * std::tan(th));
    }
    CubicSpline s_int(bg.dense_grid, integrand);
    const double base = s_int.integral(bg.theta_so);
    const double g1so = bg.g1(bg.theta_so);
    for (double th : bg.grid) {
        const double expected = g1so * std::exp(-(s_int.integral(th) - base));
        CHECK(bg.g1(th) == Approx(expected).epsilon(1e-8));
    }
}

TEST_CASE("background rejects non-sonic data") {
    SonicInit bad = canonical_sonic_init();
    bad.u01 *= 1.01;
    CHECK_THROWS_AS(solve_background(bad, kGas), ConfigurationError);
}

TEST_CASE("coefficients: signs, f normalization, k11 sign change") {
    const BackgroundTable& bg = canonical_bg();
    const CoefficientTable& ct = canonical_coeffs();
    CHECK(ct.s_f.eval(bg.theta_so) == Approx(1.0).epsilon(1e-12));
    for (std::size_t i = 0; i < bg.grid.size(); ++i) {
        CHECK(ct.a11[i] > 0.0);
        CHECK(ct.a22[i] > 0.0);
        CHECK(ct.a12[i] < 0.0);
        CHECK(ct.e1[i] > 0.0);
        const double msq = bg.mach_sq(bg.grid[i]);
        if (msq > 1.0 + 1e-9) CHECK(ct.k11[i] < 0.0);
        if (msq < 1.0 - 1e-9) CHECK(ct.k11[i] > 0.0);
    }
    CHECK(std::fabs(ct.s_k11.eval(bg.theta_so)) < 1e-9);
}

TEST_CASE("identity suite passes at its tolerances") {
    const IdentityReport rep = verify_identities(canonical_coeffs());
    CAPTURE(rep.max_k1);
    CAPTURE(rep.key2_max_rel);
    CAPTURE(rep.key3_max_rel);
    CAPTURE(rep.deriv_agreement);
    CHECK(rep.max_k1 < 1e-7);
    CHECK(rep.key2_max_rel < 1e-6);
    CHECK(rep.key3_max_rel < 1e-6);
    CHECK(rep.key2_min > 0.0);
    CHECK(rep.key3_min > 0.0);
    CHECK(rep.deriv_agreement < 1e-6);
    CHECK(rep.passed);
    CHECK_NOTHROW(require_identities(canonical_coeffs()));
}

TEST_CASE("multiplier: paper inequalities on the whole grid") {
    const MultiplierTable& mt = canonical_mult();
    const CoefficientTable& ct = canonical_coeffs();
    const BackgroundTable& bg = canonical_bg();

    double max_kt2 = 0.0;
    for (std::size_t i = 0; i < bg.grid.size(); ++i) {
        max_kt2 = std::max(max_kt2, std::fabs(mt.ktilde2[i]));
        CHECK(mt.ktilde1[i] >= 2.0);
        CHECK(mt.ktilde3[i] >= 0.5 * mt.d_star);
        CHECK(mt.ktilde3[i] >= 2.0);
        CHECK(mt.d1[i] > 0.0);
        CHECK(mt.d2[i] > 0.0);
        CHECK(mt.l1[i] < 0.0);
        CHECK(mt.l2[i] > 0.0);
        CHECK(mt.k1q[i] > 0.0);
        CHECK(mt.k2q[i] < 0.0);
        CHECK(mt.k3q[i] > 0.0);
        CHECK(4.0 * mt.k1q[i] * mt.k3q[i] - mt.k2q[i] * mt.k2q[i] > 0.0);
        CHECK(mt.phi_mode[i] >= 2.0);
        if (bg.grid[i] >= bg.theta_so) CHECK(mt.k4q[i] > 0.0);
    }
    CHECK(max_kt2 < 1e-9);
    CHECK(mt.d_star == std::max(4.0, *std::max_element(mt.d1.begin(), mt.d1.end())));
    (void)ct;
}

TEST_CASE("K4 at the sonic point and sigma0") {
    const MultiplierTable& mt = canonical_mult();
    const BackgroundTable& bg = canonical_bg();
    CHECK(mt.s_k4.eval(bg.theta_so) > 0.0);
    CHECK(mt.sigma0 > 0.0);
    // K4 > 0 on [theta_so - sigma0, theta_plus]
    for (int i = 0; i <= 200; ++i) {
        const double th =
            bg.theta_so - mt.sigma0 + (bg.theta_plus - bg.theta_so + mt.sigma0) * i / 200.0;
        CHECK(mt.s_k4.eval(th) > -1e-12);
    }
    // and K4 <= floor just below it
    const double below = bg.theta_so - 1.05 * mt.sigma0;
    if (below > bg.theta_minus) CHECK(mt.s_k4.eval(below) < 1e-6);
}

TEST_CASE("sigma0 is stable under grid refinement") {
    BackgroundConfig coarse;
    coarse.n_samples = 1024;
    coarse.dense_factor = 32;
    const BackgroundTable bg2 = solve_background(canonical_sonic_init(), kGas, coarse);
    const CoefficientTable ct2 = coefficients(bg2);
    const MultiplierTable mt2 = build_multiplier(ct2);
    const double cell = (bg2.theta_plus - bg2.theta_minus) / (1024.0 * 32.0);
    CHECK(std::fabs(mt2.sigma0 - canonical_mult().sigma0) < 2.0 * cell);
}

TEST_CASE("csv exports carry one column per function") {
    std::ostringstream os;
    write_coefficients_csv(os, canonical_coeffs(), &canonical_mult());
    const std::string header = os.str().substr(0, os.str().find('\n'));
    CHECK(header ==
          "theta,a11,a12,a22,e1,e2,f,fp_over_f,k11,k2,k33,d1,d2,l1,l2,ktilde1,ktilde2,ktilde3,K1,"
          "K2,K3,K4,phi_mode");
}
