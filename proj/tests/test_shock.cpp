#include <doctest.h>

#include <cmath>
#include <numbers>

#include "coneflow/shock.hpp"
#include "oracles.hpp"

using namespace coneflow;
using doctest::Approx;

namespace {
constexpr double kPi = std::numbers::pi;

IncomingFlow make_inflow(double m0, double u03_frac, double gamma = 1.4) {
    IncomingFlow in;
    in.gas.gamma = gamma;
    in.rho0 = 1.0;
    in.a0 = 1.0 / gamma;  // c0 = 1
    const double q0 = m0;
    const double u03 = u03_frac * q0;
    in.u03 = u03;
    in.u02 = -std::sqrt(q0 * q0 - u03 * u03);
    return in;
}

double max_rh_residual(const IncomingFlow& in, const FlowState& up, const FlowState& dn) {
    const double gamma = in.gas.gamma;
    const double pm = up.entropy_a * std::pow(up.rho, gamma);
    const double pp = dn.entropy_a * std::pow(dn.rho, gamma);
    const double bm = 0.5 * (up.u1 * up.u1 + up.u2 * up.u2 + up.u3 * up.u3) +
                      gamma * pm / ((gamma - 1.0) * up.rho);
    const double bp = 0.5 * (dn.u1 * dn.u1 + dn.u2 * dn.u2 + dn.u3 * dn.u3) +
                      gamma * pp / ((gamma - 1.0) * dn.rho);
    const double scale = std::fabs(up.rho * up.u2 * up.u2) + pm;
    const double r1 = std::fabs(dn.rho * dn.u2 - up.rho * up.u2) / std::fabs(up.rho * up.u2);
    const double r2 = std::fabs(dn.rho * dn.u1 * dn.u2 - up.rho * up.u1 * up.u2) /
                      std::max(1e-30, std::fabs(up.rho * up.u1 * up.u2));
    const double r3 =
        std::fabs(dn.rho * dn.u2 * dn.u2 + pp - up.rho * up.u2 * up.u2 - pm) / scale;
    const double r4 = std::fabs(dn.rho * dn.u2 * dn.u3 - up.rho * up.u2 * up.u3) /
                      std::max(1e-30, std::fabs(up.rho * up.u2 * up.u3));
    const double r5 = std::fabs(bp - bm) / bm;
    return std::max({r1, r2, r3, r4, r5});
}
}  // namespace

TEST_CASE("upstream flow closed form") {
    SUBCASE("u03 = 0 reduces to the horizontal stream") {
        const auto in = make_inflow(2.0, 0.0);
        UpstreamFlow up(in);
        for (double t : {0.8, 1.2, 1.5}) {
            const FlowState s = up.evaluate(t);
            CHECK(s.u1 == Approx(2.0 * std::cos(t)).epsilon(1e-14));
            CHECK(s.u2 == Approx(-2.0 * std::sin(t)).epsilon(1e-14));
            CHECK(s.u3 == 0.0);
        }
    }
    SUBCASE("boundary data recovered at the equator") {
        const auto in = make_inflow(2.0, 0.2);
        UpstreamFlow up(in);
        const FlowState s = up.evaluate(kPi / 2.0);
        CHECK(std::fabs(s.u1) < 1e-12);
        CHECK(s.u2 == Approx(in.u02).epsilon(1e-13));
        CHECK(s.u3 == Approx(in.u03).epsilon(1e-7));
    }
    SUBCASE("g2 vanishes and the speed is q0 along the stream") {
        oracle::Rng rng(5);
        for (int i = 0; i < 20; ++i) {
            const auto in = make_inflow(rng.uniform(1.3, 3.0), rng.uniform(0.0, 0.4));
            UpstreamFlow up(in);
            const double t = rng.uniform(up.theta_min() + 0.05, kPi / 2.0);
            const FlowState s = up.evaluate(t);
            const double g2 = s.u2 * (s.u1 * std::sin(t) + s.u2 * std::cos(t)) +
                              s.u3 * s.u3 * std::cos(t);
            const double speed_sq = s.u1 * s.u1 + s.u2 * s.u2 + s.u3 * s.u3;
            CHECK(std::fabs(g2) < 1e-12 * in.q0_sq());
            CHECK(speed_sq == Approx(in.q0_sq()).epsilon(1e-12));
        }
    }
}

TEST_CASE("critical angles: closed forms vs roots and paper values") {
    SUBCASE("h0 endpoints") {
        for (double m0 : {1.5, 2.0, 3.0}) {
            const double m0sq = m0 * m0;
            CHECK(h0_of(1.0, m0sq, 1.4) == Approx(m0sq - 1.0).epsilon(1e-13));
            const double expected =
                -(1.0 / 2.4) * ((0.4) * m0sq + 2.0) * (m0sq - 1.0);
            CHECK(h0_of(m0sq, m0sq, 1.4) == Approx(expected).epsilon(1e-13));
        }
    }
    SUBCASE("frozen a_sharp^2 values (gamma = 1.4)") {
        CHECK(critical_angles(make_inflow(1.5, 0.2)).a_sharp_sq ==
              Approx(1.7624279218209655848).epsilon(1e-13));
        CHECK(critical_angles(make_inflow(2.0, 0.2)).a_sharp_sq ==
              Approx(3.0884214340888929508).epsilon(1e-13));
        CHECK(critical_angles(make_inflow(3.0, 0.2)).a_sharp_sq ==
              Approx(7.2414950224757511486).epsilon(1e-13));
    }
    SUBCASE("u03 = 0: under_theta = asin(1/M0), theta_sharp = asin(a_sharp/M0)") {
        const auto in = make_inflow(2.0, 0.0);
        const auto ca = critical_angles(in);
        CHECK(ca.theta_min == Approx(0.0));
        CHECK(ca.under_theta == Approx(std::asin(0.5)).epsilon(1e-13));
        REQUIRE(ca.theta_sharp.has_value());
        CHECK(*ca.theta_sharp == Approx(1.0731221769839804413).epsilon(1e-12));
        CHECK(ca.q_tilde0 == Approx(0.75).epsilon(1e-14));
        REQUIRE(ca.theta_s.has_value());
        CHECK(*ca.theta_s > ca.under_theta);
        CHECK(*ca.theta_s < *ca.theta_sharp);
    }
    SUBCASE("ordering for swirling inflow") {
        const auto in = make_inflow(2.0, 0.2);
        const auto ca = critical_angles(in);
        CHECK(ca.theta_min < ca.under_theta);
        CHECK(ca.under_theta < kPi / 2.0);
        CHECK(ca.a_sharp_sq > 1.0);
        CHECK(ca.a_sharp_sq < in.m0_sq());
    }
}

TEST_CASE("rh_downstream satisfies all jump conditions") {
    oracle::Rng rng(13);
    for (double m0 : {1.5, 2.0, 3.0}) {
        for (double frac : {0.0, 0.2}) {
            const auto in = make_inflow(m0, frac);
            const auto ca = critical_angles(in);
            UpstreamFlow up(in);
            for (int k = 0; k < 8; ++k) {
                const double tb =
                    rng.uniform(ca.under_theta + 1e-3, kPi / 2.0 - 1e-3);
                const FlowState um = up.evaluate(tb);
                const FlowState dp = rh_downstream(in, tb);
                CHECK(max_rh_residual(in, um, dp) < 1e-12);
                // entropy condition
                const double pm = in.a0 * std::pow(in.rho0, in.gas.gamma);
                const double pp = dp.entropy_a * std::pow(dp.rho, in.gas.gamma);
                CHECK(pp > pm);
                // Prandtl relation
                const double kf = prandtl_k(um, in.gas);
                CHECK(dp.u2 * um.u2 == Approx(kf).epsilon(1e-12));
                const double kf_dn = prandtl_k(dp, in.gas);
                CHECK(kf_dn == Approx(kf).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("vanishing-strength limit near under_theta") {
    const auto in = make_inflow(2.0, 0.2);
    const auto ca = critical_angles(in);
    UpstreamFlow up(in);
    const double tb = ca.under_theta + 1e-9;
    const FlowState um = up.evaluate(tb);
    const FlowState dp = rh_downstream(in, tb);
    CHECK(dp.u2 == Approx(um.u2).epsilon(1e-4));
    const double pm = in.a0 * std::pow(in.rho0, in.gas.gamma);
    const double pp = dp.entropy_a * std::pow(dp.rho, in.gas.gamma);
    CHECK(pp - pm < 1e-7);
    CHECK_THROWS_AS(rh_downstream(in, ca.under_theta - 0.01), WeakShockViolation);
    CHECK_THROWS_AS(rh_downstream(in, kPi / 2.0 + 0.01), WeakShockViolation);
}

TEST_CASE("shock polar matches rh_downstream and has positive slope") {
    const auto in = make_inflow(2.0, 0.0);
    const auto ca = critical_angles(in);
    SUBCASE("G(0) = -q_tilde0") {
        CHECK(shock_polar(0.0, in).g == Approx(-ca.q_tilde0).epsilon(1e-14));
    }
    SUBCASE("slope positive and cross-operation consistency") {
        oracle::Rng rng(29);
        for (int i = 0; i < 12; ++i) {
            const double tb = rng.uniform(ca.under_theta + 1e-3, kPi / 2.0 - 1e-3);
            const FlowState dp = rh_downstream(in, tb);
            const auto pol = shock_polar(dp.u1, in);
            CHECK(pol.g == Approx(dp.u2).epsilon(1e-12));
            CHECK(pol.g_prime > 0.0);
            // slope against a centered difference
            const double h = 1e-6;
            const double fd = (shock_polar(dp.u1 + h, in).g - shock_polar(dp.u1 - h, in).g) /
                              (2.0 * h);
            CHECK(pol.g_prime == Approx(fd).epsilon(1e-7));
        }
    }
}

TEST_CASE("condition (2.22) evaluation") {
    SUBCASE("u03 = 0 always holds") {
        const auto rep = check_condition_290(make_inflow(2.0, 0.0));
        CHECK(rep.holds);
        CHECK(rep.sufficient_a);
    }
    SUBCASE("vertex decision agrees with dense sampling") {
        oracle::Rng rng(37);
        for (int i = 0; i < 30; ++i) {
            const auto in = make_inflow(rng.uniform(1.2, 3.5), rng.uniform(0.0, 0.7));
            const auto rep = check_condition_290(in);
            const double gamma = in.gas.gamma;
            const double q2 = in.q0_sq(), u3sq = in.u03 * in.u03;
            bool dense_holds = true;
            double dense_min = 1e300;
            for (int k = 1; k < 100000; ++k) {
                const double t = k / 100000.0;
                const double v = (gamma - 1.0) * q2 * q2 * t * t +
                                 (2.0 * in.c0_sq() * in.u02 * in.u02 -
                                  (3.0 * gamma - 1.0) * u3sq * q2) *
                                     t +
                                 2.0 * gamma * u3sq * u3sq;
                dense_min = std::min(dense_min, v);
                if (v <= 0.0) dense_holds = false;
            }
            CHECK(rep.holds == dense_holds);
            if (rep.holds) CHECK(rep.min_value >= dense_min - 1e-12 * std::fabs(dense_min));
            if (rep.sufficient_a || rep.sufficient_b) CHECK(rep.holds);
        }
    }
}

TEST_CASE("solve_conic_shock classifies the downstream flow") {
    const auto in = make_inflow(2.0, 0.0);
    const auto ca = critical_angles(in);
    REQUIRE(ca.theta_s.has_value());
    REQUIRE(ca.theta_sharp.has_value());

    SUBCASE("below theta_s: uniformly supersonic") {
        const auto sol = solve_conic_shock(in, 0.5 * (ca.under_theta + *ca.theta_s));
        CHECK(sol.class_code == 1);
        CHECK(sol.mach_sq_behind > 1.0);
        CHECK(sol.mach_sq_cone > 1.0);
    }
    SUBCASE("between theta_s and theta_sharp: smooth transition downstream") {
        const auto sol = solve_conic_shock(in, 0.5 * (*ca.theta_s + *ca.theta_sharp));
        CHECK(sol.class_code == 3);
        CHECK(sol.mach_sq_behind > 1.0);
        CHECK(sol.mach_sq_cone < 1.0);
    }
    SUBCASE("at theta_sharp: shock and sonic front coincide") {
        const auto sol = solve_conic_shock(in, *ca.theta_sharp);
        CHECK(std::fabs(sol.mach_sq_behind - 1.0) < 1e-8);
        CHECK(sol.class_code == 5);
    }
    SUBCASE("above theta_sharp: supersonic-subsonic shock") {
        const auto sol = solve_conic_shock(in, 0.5 * (*ca.theta_sharp + kPi / 2.0));
        CHECK(sol.class_code == 4);
        CHECK(sol.mach_sq_behind < 1.0);
    }
}

TEST_CASE("swirling shock: downstream g2 < 0 and u3 vanishes at the cone") {
    const auto in = make_inflow(2.0, 0.2);
    REQUIRE(check_condition_290(in).holds);
    const auto ca = critical_angles(in);
    oracle::Rng rng(41);
    for (int i = 0; i < 5; ++i) {
        const double tb = rng.uniform(ca.under_theta + 0.05, kPi / 2.0 - 0.05);
        const auto sol = solve_conic_shock(in, tb);
        const DerivedState d = sol.downstream.samples.front().derived;
        CHECK(d.g2 < 0.0);
        CHECK(1.0 - d.mach2 * d.mach2 > 0.0);
        CHECK(std::fabs(sol.downstream.final_state().u3) < 1e-6);
        CHECK(std::fabs(sol.downstream.final_state().u2) < 1e-9);
    }
}

TEST_CASE("apple sweep: monotone cone velocity within bounds") {
    const auto in = make_inflow(2.0, 0.0);
    const auto ca = critical_angles(in);
    const auto grid = default_theta_b_grid(in, 25);
    const auto sweep = apple_curve(in, grid);
    REQUIRE(sweep.rows.size() == 25);
    double prev = 1e300;
    for (const auto& row : sweep.rows) {
        REQUIRE(row.ok);
        CHECK(row.u1_cone < prev);
        prev = row.u1_cone;
        CHECK(row.u1_cone > ca.q_tilde0);
        CHECK(row.u1_cone < in.q0());
        CHECK(row.pressure_jump > 0.0);
    }
    REQUIRE(sweep.theta_s.has_value());
    REQUIRE(ca.theta_s.has_value());
    CHECK(*sweep.theta_s == Approx(*ca.theta_s).epsilon(1e-6));

    // adjacent grid points bracket theta_s with a sign change in |M|^2 - 1
    bool bracketed = false;
    for (std::size_t i = 0; i + 1 < sweep.rows.size(); ++i) {
        if (sweep.rows[i].theta_b <= *sweep.theta_s && *sweep.theta_s <= sweep.rows[i + 1].theta_b)
            bracketed = true;
    }
    CHECK(bracketed);
}
