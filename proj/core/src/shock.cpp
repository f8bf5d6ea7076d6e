#include "coneflow/shock.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "coneflow/csvio.hpp"
#include "coneflow/rootfind.hpp"

namespace coneflow {

namespace {
constexpr double kHalfPi = std::numbers::pi / 2.0;

void require(bool cond, const std::string& what) {
    if (!cond) throw DomainError(what);
}
}  // namespace

double IncomingFlow::c0_sq() const { return a0 * gas.gamma * std::pow(rho0, gas.gamma - 1.0); }
double IncomingFlow::c0() const { return std::sqrt(c0_sq()); }
double IncomingFlow::q0() const { return std::sqrt(q0_sq()); }
double IncomingFlow::bernoulli0() const { return 0.5 * q0_sq() + c0_sq() / (gas.gamma - 1.0); }

void IncomingFlow::validate() const {
    require(gas.gamma > 1.0, "gamma must exceed 1");
    require(rho0 > 0.0, "rho0 must be positive");
    require(a0 > 0.0, "A0 must be positive");
    require(u02 < 0.0, "U02 must be negative (flow toward the cone)");
    require(a1_sq() > 1.0, "a1^2 = U02^2/c0^2 must exceed 1 (relative supersonic)");
}

double h0_of(double tau, double m0_sq, double gamma) {
    return -2.0 * gamma / (gamma + 1.0) * tau * tau + ((gamma - 3.0) / (gamma + 1.0) + m0_sq) * tau +
           2.0 / (gamma + 1.0);
}

double k_of(double t, const IncomingFlow& in) {
    const double q2 = in.q0_sq(), u3sq = in.u03 * in.u03;
    return q2 * q2 * t * t - (2.0 * q2 * u3sq + in.c0_sq() * in.u02 * in.u02) * t + u3sq * u3sq;
}

UpstreamFlow::UpstreamFlow(const IncomingFlow& inflow) : in_(inflow) {
    in_.validate();
    theta_min_ = std::asin(std::fabs(in_.u03) / in_.q0());
}

FlowState UpstreamFlow::evaluate(double theta) const {
    const double st = std::sin(theta), ct = std::cos(theta);
    const double q0sq = in_.q0_sq();
    FlowState s;
    s.theta = theta;
    s.rho = in_.rho0;
    s.entropy_a = in_.a0;
    s.u1 = q0sq * ct / (-in_.u02);
    s.u2 = (in_.u02 * in_.u02 - q0sq * ct * ct) / (in_.u02 * st);
    const double u3sq = q0sq - s.u1 * s.u1 - s.u2 * s.u2;
    s.u3 = std::copysign(std::sqrt(std::max(0.0, u3sq)), in_.u03);
    if (in_.u03 == 0.0) s.u3 = 0.0;
    return s;
}

double prandtl_k(const FlowState& up, GasConstants gas) {
    const double c2 = sound_speed_sq(up.rho, up.entropy_a, gas);
    return 2.0 / (gas.gamma + 1.0) * c2 + (gas.gamma - 1.0) / (gas.gamma + 1.0) * up.u2 * up.u2;
}

namespace {

struct CoreAngles {
    double theta_min, under_theta, a_sharp_sq, q_tilde0;
    std::optional<double> theta_sharp;
};

double under_theta_closed_form(const IncomingFlow& in) {
    const double q2 = in.q0_sq(), u3sq = in.u03 * in.u03, c0 = in.c0();
    const double u02a = std::fabs(in.u02);
    const double s2 = (2.0 * q2 * u3sq + c0 * c0 * in.u02 * in.u02 +
                       c0 * u02a * std::sqrt(4.0 * q2 * u3sq + c0 * c0 * in.u02 * in.u02)) /
                      (2.0 * q2 * q2);
    return std::asin(std::sqrt(s2));
}

double a_sharp_closed_form(double m0_sq, double gamma) {
    const double b = (gamma - 3.0) + (gamma + 1.0) * m0_sq;
    return (b + std::sqrt(b * b + 16.0 * gamma)) / (4.0 * gamma);
}

// (M2^-)^2 as a function of t = sin^2(theta_b)
double m2m_sq_of_t(double t, const IncomingFlow& in) {
    const double num = in.q0_sq() * t - in.u03 * in.u03;
    return num * num / (in.u02 * in.u02 * in.c0_sq() * t);
}

void cross_check(double a, double b, const char* what) {
    const double scale = std::max({std::fabs(a), std::fabs(b), 1e-300});
    if (std::fabs(a - b) / scale > 1e-12)
        throw std::runtime_error(std::string("dual-method disagreement for ") + what + ": " +
                                 format_double(a) + " vs " + format_double(b));
}

CoreAngles core_angles(const IncomingFlow& in) {
    in.validate();
    CoreAngles ca;
    const double gamma = in.gas.gamma;
    const double m0sq = in.m0_sq();
    ca.theta_min = std::asin(std::fabs(in.u03) / in.q0());

    const double asharp_cf = a_sharp_closed_form(m0sq, gamma);
    const double asharp_rt =
        brent([&](double tau) { return h0_of(tau, m0sq, gamma); }, 1.0, m0sq, 1e-13);
    cross_check(asharp_cf, asharp_rt, "a_sharp^2");
    ca.a_sharp_sq = asharp_cf;

    const double under_cf = under_theta_closed_form(in);
    const double t_lo = (in.u03 == 0.0) ? 1e-12 : std::pow(std::sin(ca.theta_min), 2);
    const double under_rt = std::asin(
        std::sqrt(brent([&](double t) { return k_of(t, in); }, t_lo, 1.0 - 1e-15, 1e-15)));
    cross_check(under_cf, under_rt, "under_theta");
    ca.under_theta = under_cf;

    ca.q_tilde0 = ((gamma - 1.0) * in.q0_sq() + 2.0 * in.c0_sq()) / ((gamma + 1.0) * in.q0());

    if (ca.a_sharp_sq < in.a1_sq()) {
        const double t_under = std::pow(std::sin(ca.under_theta), 2);
        const double t_sharp = brent(
            [&](double t) { return m2m_sq_of_t(t, in) - ca.a_sharp_sq; }, t_under, 1.0, 1e-15);
        ca.theta_sharp = std::asin(std::sqrt(t_sharp));
        if (in.u03 == 0.0)
            cross_check(*ca.theta_sharp, std::asin(std::sqrt(ca.a_sharp_sq / m0sq)),
                        "theta_sharp");
    }
    return ca;
}

}  // namespace

FlowState rh_downstream(const IncomingFlow& in, double theta_b) {
    in.validate();
    const CoreAngles ca = core_angles(in);
    if (!(theta_b < kHalfPi))
        throw WeakShockViolation("theta_b must lie below pi/2");
    if (!(theta_b > ca.under_theta))
        throw WeakShockViolation(
            "theta_b <= under_theta: |U2^-|^2 > K fails (no compressive jump), k(sin^2 theta_b) = " +
            format_double(k_of(std::pow(std::sin(theta_b), 2), in)));

    const UpstreamFlow up(in);
    const FlowState um = up.evaluate(theta_b);
    const double gamma = in.gas.gamma;
    const double kfac = prandtl_k(um, in.gas);

    FlowState dp;
    dp.theta = theta_b;
    dp.u1 = um.u1;
    dp.u3 = um.u3;
    dp.u2 = kfac / um.u2;
    dp.rho = in.rho0 * um.u2 / dp.u2;
    const double speed_sq = dp.u1 * dp.u1 + dp.u2 * dp.u2 + dp.u3 * dp.u3;
    dp.entropy_a = std::pow(dp.rho, 1.0 - gamma) * (gamma - 1.0) / gamma *
                   (in.bernoulli0() - 0.5 * speed_sq);

    const double p_up = in.a0 * std::pow(in.rho0, gamma);
    const double p_dn = dp.entropy_a * std::pow(dp.rho, gamma);
    if (!(p_dn > p_up))
        throw WeakShockViolation("entropy condition [p] > 0 fails at theta_b = " +
                                 format_double(theta_b));
    return dp;
}

ShockPolarPoint shock_polar(double s, const IncomingFlow& in) {
    in.validate();
    if (in.u03 != 0.0) throw DomainError("shock polar defined for u03 = 0 incoming data");
    const double q0sq = in.q0_sq(), c0sq = in.c0_sq(), gamma = in.gas.gamma;
    const CoreAngles ca = core_angles(in);
    if (!(s >= 0.0 && s < in.q0() * std::cos(ca.under_theta)))
        throw DomainError("shock polar argument outside [0, q0 cos(under_theta))");
    const double rest = q0sq - s * s;
    ShockPolarPoint p;
    p.g = -((gamma - 1.0) * rest + 2.0 * c0sq) / ((gamma + 1.0) * std::sqrt(rest));
    p.g_prime = s * std::pow(rest, -1.5) * (rest + 2.0 * c0sq) / (gamma + 1.0);
    return p;
}

Condition290Report check_condition_290(const IncomingFlow& in) {
    in.validate();
    const double gamma = in.gas.gamma;
    const double q2 = in.q0_sq(), q4 = q2 * q2, u3sq = in.u03 * in.u03;
    const double c0sq = in.c0_sq(), u02sq = in.u02 * in.u02;
    const double alpha = (gamma - 1.0) * q4;
    const double beta = 2.0 * c0sq * u02sq - (3.0 * gamma - 1.0) * u3sq * q2;
    const double delta = 2.0 * gamma * u3sq * u3sq;
    auto quad = [&](double t) { return (alpha * t + beta) * t + delta; };

    Condition290Report rep;
    if (beta >= 0.0) {
        rep.witness_t = 0.0;
        rep.min_value = delta;
        rep.holds = true;  // value > delta >= 0 for every t in (0,1)
    } else {
        const double tv = -beta / (2.0 * alpha);
        if (tv >= 1.0) {
            rep.witness_t = 1.0;
            rep.min_value = quad(1.0);
            rep.holds = rep.min_value >= 0.0;
        } else {
            rep.witness_t = tv;
            rep.min_value = quad(tv);
            rep.holds = rep.min_value > 0.0;
        }
    }
    rep.sufficient_a =
        2.0 * c0sq * u02sq >
        (3.0 * gamma - 1.0 - 2.0 * std::sqrt(2.0 * gamma * (gamma - 1.0))) * q2 * u3sq;
    rep.sufficient_b = ((3.0 * gamma - 1.0) * u3sq * q2 >= 2.0 * c0sq * u02sq + 2.0 * (gamma - 1.0) * q4) &&
                       ((gamma - 1.0) * q4 + 2.0 * c0sq * u02sq + 2.0 * gamma * u3sq * u3sq >
                        (3.0 * gamma - 1.0) * q2 * u3sq);
    return rep;
}

ShockSolution solve_conic_shock(const IncomingFlow& in, double theta_b,
                                const ShockSolveConfig& config) {
    in.validate();
    const CoreAngles ca = core_angles(in);
    if (theta_b <= ca.under_theta + config.theta_b_margin)
        throw WeakShockViolation("theta_b within the degenerate margin of under_theta");
    if (in.u03 != 0.0) {
        const auto rep = check_condition_290(in);
        if (!rep.holds)
            throw WeakShockViolation("condition (g2^+ < 0) fails for this incoming flow, min " +
                                     format_double(rep.min_value) + " at t = " +
                                     format_double(rep.witness_t));
    }

    ShockSolution sol;
    sol.theta_b = theta_b;
    sol.downstream_at_shock = rh_downstream(in, theta_b);

    const double p_up = in.a0 * std::pow(in.rho0, in.gas.gamma);
    sol.pressure_jump =
        sol.downstream_at_shock.entropy_a * std::pow(sol.downstream_at_shock.rho, in.gas.gamma) -
        p_up;

    ProblemOneInit dn{sol.downstream_at_shock, in.gas};
    sol.downstream = integrate_problem1(dn, 1e-6, config.integration);
    if (sol.downstream.termination.kind != TerminationKind::PolarVelocityVanishes)
        throw std::runtime_error(std::string("downstream integration ended with ") +
                                 to_string(sol.downstream.termination.kind) +
                                 " instead of reaching the cone");
    sol.theta_star = sol.downstream.termination.theta_event;

    const DerivedState d_shock = sol.downstream.samples.front().derived;
    const DerivedState d_cone = sol.downstream.samples.back().derived;
    sol.mach_sq_behind = d_shock.mach_sq_total;
    sol.mach_sq_cone = d_cone.mach_sq_total;
    sol.u1_cone = sol.downstream.final_state().u1;

    if (std::fabs(sol.mach_sq_behind - 1.0) <= config.sonic_tol_shock) {
        sol.class_code = 5;
    } else if (sol.mach_sq_behind < 1.0) {
        sol.class_code = 4;
    } else if (std::fabs(sol.mach_sq_cone - 1.0) <= config.sonic_tol_cone) {
        sol.class_code = 2;
    } else if (sol.mach_sq_cone > 1.0) {
        sol.class_code = 1;
    } else {
        sol.class_code = 3;
    }
    return sol;
}

namespace {

std::optional<double> locate_theta_s(const IncomingFlow& in, double lo, double hi,
                                     const ShockSolveConfig& config) {
    auto cone_excess = [&](double tb) {
        return solve_conic_shock(in, tb, config).mach_sq_cone - 1.0;
    };
    try {
        return bisect(cone_excess, lo, hi, 1e-8);
    } catch (const BracketError&) {
        return std::nullopt;
    }
}

}  // namespace

CriticalAngles critical_angles(const IncomingFlow& in) {
    const CoreAngles core = core_angles(in);
    CriticalAngles ca;
    ca.theta_min = core.theta_min;
    ca.under_theta = core.under_theta;
    ca.a_sharp_sq = core.a_sharp_sq;
    ca.q_tilde0 = core.q_tilde0;
    ca.theta_sharp = core.theta_sharp;
    if (in.u03 == 0.0 && core.theta_sharp) {
        ShockSolveConfig cfg;
        ca.theta_s = locate_theta_s(in, core.under_theta + 1e-3, *core.theta_sharp, cfg);
    }
    return ca;
}

AppleSweep apple_curve(const IncomingFlow& in, const std::vector<double>& theta_b_grid,
                       const ShockSolveConfig& config) {
    in.validate();
    AppleSweep sweep;
    sweep.rows.reserve(theta_b_grid.size());
    for (double tb : theta_b_grid) {
        AppleRow row;
        row.theta_b = tb;
        try {
            const ShockSolution s = solve_conic_shock(in, tb, config);
            row.ok = true;
            row.theta_star = s.theta_star;
            row.u1_cone = s.u1_cone;
            row.class_code = s.class_code;
            row.mach_sq_behind = s.mach_sq_behind;
            row.pressure_jump = s.pressure_jump;
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
        }
        sweep.rows.push_back(std::move(row));
    }
    if (in.u03 == 0.0) {
        // bracket the sonic-on-cone angle from adjacent classified rows
        for (std::size_t i = 0; i + 1 < sweep.rows.size(); ++i) {
            const AppleRow& a = sweep.rows[i];
            const AppleRow& b = sweep.rows[i + 1];
            if (!a.ok || !b.ok) continue;
            const bool a_sup = a.class_code == 1;
            const bool b_sub = b.class_code == 2 || b.class_code == 3 || b.class_code == 4 ||
                               b.class_code == 5;
            if (a_sup && b_sub) {
                sweep.theta_s = locate_theta_s(in, a.theta_b, b.theta_b, config);
                break;
            }
        }
    }
    return sweep;
}

std::vector<double> default_theta_b_grid(const IncomingFlow& in, int n) {
    const CoreAngles core = core_angles(in);
    const double lo = core.under_theta + 1e-3;
    const double hi = kHalfPi - 1e-3;
    std::vector<double> grid(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        grid[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / static_cast<double>(n - 1);
    return grid;
}

void write_sweep_csv(std::ostream& os, const AppleSweep& sweep) {
    CsvWriter csv(os,
                  {"theta_b", "theta_star", "u1_cone", "class_code", "mach_sq_behind", "p_jump"});
    for (const auto& r : sweep.rows) {
        if (!r.ok) continue;
        csv.row(std::array{r.theta_b, r.theta_star, r.u1_cone, static_cast<double>(r.class_code),
                           r.mach_sq_behind, r.pressure_jump});
    }
}

std::string critical_angles_json(const IncomingFlow& in, const CriticalAngles& ca) {
    nlohmann::json j;
    j["gamma"] = in.gas.gamma;
    j["rho0"] = in.rho0;
    j["u02"] = in.u02;
    j["u03"] = in.u03;
    j["a0"] = in.a0;
    j["m0"] = std::sqrt(in.m0_sq());
    j["theta_min"] = ca.theta_min;
    j["under_theta"] = ca.under_theta;
    j["a_sharp_sq"] = ca.a_sharp_sq;
    j["q_tilde0"] = ca.q_tilde0;
    if (ca.theta_sharp) j["theta_sharp"] = *ca.theta_sharp;
    if (ca.theta_s) j["theta_s"] = *ca.theta_s;
    return j.dump(2);
}

}  // namespace coneflow
