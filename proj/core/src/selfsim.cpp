#include "coneflow/selfsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "coneflow/csvio.hpp"
#include "coneflow/rootfind.hpp"

namespace coneflow {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

struct RhsTerms {
    double u1p, u2p, u3p, rhop;
};

// Raw right-hand side; callers guard the denominators.
RhsTerms rhs_terms(double theta, double u1, double u2, double u3, double rho, double a0,
                   double gamma) {
    const double st = std::sin(theta);
    const double ct = std::cos(theta);
    const double c2 = a0 * gamma * std::pow(rho, gamma - 1.0);
    const double m2sq = u2 * u2 / c2;
    const double one_minus = 1.0 - m2sq;
    const double g1 = u1 * st + u2 * ct;
    const double g2 = u2 * g1 + u3 * u3 * ct;
    RhsTerms r;
    r.u1p = (u2 * u2 + u3 * u3) / u2;
    r.u2p = -(u1 + g2 / (one_minus * u2 * st) - u3 * u3 * ct / (u2 * st));
    r.u3p = -g1 * u3 / (u2 * st);
    r.rhop = g2 * rho / ((c2 - u2 * u2) * st);
    return r;
}

}  // namespace

const char* to_string(TerminationKind k) {
    switch (k) {
        case TerminationKind::ReachedEnd: return "reached_end";
        case TerminationKind::PolarVelocityVanishes: return "polar_velocity_vanishes";
        case TerminationKind::SonicPolarDegeneracy: return "sonic_polar_degeneracy";
        case TerminationKind::AxisReached: return "axis_reached";
        case TerminationKind::StepFailure: return "step_failure";
    }
    return "unknown";
}

const char* to_string(RegimeCase c) {
    switch (c) {
        case RegimeCase::SupersonicPolar: return "supersonic_polar";
        case RegimeCase::BeltramiG2Zero: return "beltrami_g2_zero";
        case RegimeCase::TransitionCase3: return "transition_case3";
        case RegimeCase::Other: return "other";
    }
    return "unknown";
}

std::array<double, 4> ode_rhs(double theta, const FlowState& s, GasConstants gas, double u2_guard,
                              double sonic_guard) {
    validate(s);
    const double c2 = sound_speed_sq(s.rho, s.entropy_a, gas);
    if (std::fabs(s.u2) <= u2_guard) throw SingularityError("u2", theta);
    if (std::fabs(1.0 - s.u2 * s.u2 / c2) <= sonic_guard) throw SingularityError("1-M2^2", theta);
    if (std::sin(theta) == 0.0) throw SingularityError("sin(theta)", theta);
    const RhsTerms r = rhs_terms(theta, s.u1, s.u2, s.u3, s.rho, s.entropy_a, gas.gamma);
    return {r.u1p, r.u2p, r.u3p, r.rhop};
}

RegimeClassification classify_initial(const ProblemOneInit& init) {
    validate(init.state0);
    const DerivedState d = derive(init.state0, init.gas);
    RegimeClassification rc;
    rc.one_minus_m2sq = 1.0 - d.mach2 * d.mach2;
    rc.g2 = d.g2;
    rc.u2 = init.state0.u2;
    const double scale = std::fabs(init.state0.u1 * init.state0.u2) +
                         init.state0.u2 * init.state0.u2 + init.state0.u3 * init.state0.u3;
    if (rc.one_minus_m2sq < 0.0) {
        rc.kind = RegimeCase::SupersonicPolar;
    } else if (std::fabs(d.g2) < 1e-10 * scale) {
        rc.kind = RegimeCase::BeltramiG2Zero;
    } else if (rc.one_minus_m2sq > 0.0 && rc.u2 < 0.0 && d.g2 < 0.0) {
        rc.kind = RegimeCase::TransitionCase3;
    } else {
        rc.kind = RegimeCase::Other;
    }
    return rc;
}

Trajectory integrate_problem1(const ProblemOneInit& init, double theta_target,
                              const IntegrationConfig& config) {
    validate(init.state0);
    if (init.state0.u2 == 0.0) throw DomainError("problem I requires U2(theta0) != 0");
    const double theta0 = init.state0.theta;
    const double a0 = init.state0.entropy_a;
    const double gamma = init.gas.gamma;
    const double u2sign = init.state0.u2 > 0.0 ? 1.0 : -1.0;
    const double u2_halt = config.u2_guard_rel * 1e-4 * std::fabs(init.state0.u2);
    const double u2_event = config.u2_guard_rel * std::fabs(init.state0.u2);

    Trajectory tr;
    tr.decreasing_theta = theta_target < theta0;
    tr.a0 = a0;
    tr.b0 = bernoulli(init.state0, init.gas);

    const double lo = config.axis_guard, hi = std::numbers::pi - config.axis_guard;
    bool target_clamped = false;
    if (theta_target < lo) { theta_target = lo; target_clamped = true; }
    if (theta_target > hi) { theta_target = hi; target_clamped = true; }

    auto push = [&](double theta, const std::array<double, 4>& y) {
        FlowState s{theta, y[3], y[0], y[1], y[2], a0};
        tr.samples.push_back({s, derive(s, init.gas)});
    };

    auto rhs = [&](double t, const std::array<double, 4>& y, std::array<double, 4>& dy) {
        const double u2 = y[1];
        const double rho = y[3];
        // reject trial states past the degeneracies with NaN so the step shrinks
        if (!(rho > 0.0) || u2 * u2sign <= 0.0 || std::sin(t) <= 0.0) {
            dy.fill(kNan);
            return;
        }
        const RhsTerms r = rhs_terms(t, y[0], u2, y[2], rho, a0, gamma);
        dy = {r.u1p, r.u2p, r.u3p, r.rhop};
    };

    std::array<double, 4> y0{init.state0.u1, init.state0.u2, init.state0.u3, init.state0.rho};
    push(theta0, y0);

    OdeOptions opt;
    opt.rtol = config.rtol;
    opt.atol = config.atol;
    opt.h_min = 1e-18;
    Dopri5<4> ode(rhs, theta0, y0, theta_target, opt);

    auto one_minus_m2sq = [&](const std::array<double, 4>& y) {
        const double c2 = a0 * gamma * std::pow(y[3], gamma - 1.0);
        return 1.0 - y[1] * y[1] / c2;
    };

    const double som0 = one_minus_m2sq(y0) > 0.0 ? 1.0 : -1.0;

    for (long accepted = 0; accepted < 4'000'000; ++accepted) {
        const StepStatus st = ode.step();
        if (st == StepStatus::FailedMinStep) {
            push(ode.t(), ode.y());
            const double u2_end = std::fabs(ode.y()[1]);
            if (u2_end < u2_event) {
                tr.termination = {TerminationKind::PolarVelocityVanishes, ode.t()};
            } else if (std::fabs(one_minus_m2sq(ode.y())) < config.sonic_guard) {
                tr.termination = {TerminationKind::SonicPolarDegeneracy, ode.t()};
            } else {
                tr.termination = {TerminationKind::StepFailure, ode.t()};
            }
            return tr;
        }

        // events on the dense output of the accepted step
        const double u2_prev = ode.y_prev()[1];
        const double u2_new = ode.y()[1];
        if (u2_prev * u2_new < 0.0) {
            const double th_ev = bisect([&](double t) { return ode.eval(t)[1]; }, ode.t_prev(),
                                        ode.t(), config.event_theta_tol);
            push(th_ev, ode.eval(th_ev));
            tr.termination = {TerminationKind::PolarVelocityVanishes, th_ev};
            return tr;
        }
        const double so_prev = one_minus_m2sq(ode.y_prev());
        const double so_new = one_minus_m2sq(ode.y());
        if (so_prev * so_new < 0.0) {
            const double th_ev =
                bisect([&](double t) { return one_minus_m2sq(ode.eval(t)); }, ode.t_prev(),
                       ode.t(), config.event_theta_tol);
            push(th_ev, ode.eval(th_ev));
            tr.termination = {TerminationKind::SonicPolarDegeneracy, th_ev};
            return tr;
        }

        push(ode.t(), ode.y());

        if (std::fabs(u2_new) < u2_halt) {
            tr.termination = {TerminationKind::PolarVelocityVanishes, ode.t()};
            return tr;
        }
        if (som0 * so_new < config.sonic_guard) {
            tr.termination = {TerminationKind::SonicPolarDegeneracy, ode.t()};
            return tr;
        }
        if (st == StepStatus::ReachedEnd) {
            if (std::fabs(u2_new) < u2_event) {
                tr.termination = {TerminationKind::PolarVelocityVanishes, ode.t()};
            } else if (target_clamped) {
                tr.termination = {TerminationKind::AxisReached, ode.t()};
            } else {
                tr.termination = {TerminationKind::ReachedEnd, ode.t()};
            }
            return tr;
        }
    }
    tr.termination = {TerminationKind::StepFailure, ode.t()};
    return tr;
}

double Trajectory::max_bernoulli_drift() const {
    double worst = 0.0;
    for (const auto& s : samples)
        worst = std::max(worst, std::fabs(s.derived.bernoulli - b0) / std::fabs(b0));
    return worst;
}

BeltramiFlow::BeltramiFlow(Case c, double theta0, double u01, double u02, double u03, double rho0,
                           double a0)
    : case_(c), theta0_(theta0), u01_(u01), u02_(u02), u03_(u03), rho0_(rho0), a0_(a0) {
    q0_ = std::sqrt(u01 * u01 + u02 * u02 + u03 * u03);
    if (case_ == Case::RayData) {
        theta_min_ = std::acos(std::min(1.0, q0_ * std::cos(theta0) / u01_));
    } else {
        theta_min_ = std::asin(std::fabs(u03_) / q0_);
    }
}

FlowState BeltramiFlow::evaluate(double theta) const {
    const double st = std::sin(theta);
    const double ct = std::cos(theta);
    FlowState s;
    s.theta = theta;
    s.rho = rho0_;
    s.entropy_a = a0_;
    if (case_ == Case::RayData) {
        const double c0 = std::cos(theta0_);
        s.u1 = u01_ * ct / c0;
        s.u2 = (u01_ * u01_ * ct * ct - q0_ * q0_ * c0 * c0) / (u01_ * c0 * st);
        const double u3sq = (q0_ * q0_ * c0 * c0 - u01_ * u01_) *
                            (u01_ * u01_ * ct * ct - q0_ * q0_ * c0 * c0) /
                            (u01_ * u01_ * c0 * c0 * st * st);
        s.u3 = std::copysign(std::sqrt(std::max(0.0, u3sq)), u03_);
        if (u03_ == 0.0) s.u3 = 0.0;
    } else {
        s.u1 = q0_ * q0_ * ct / (-u02_);
        s.u2 = (u02_ * u02_ - q0_ * q0_ * ct * ct) / (u02_ * st);
        const double u3sq =
            (q0_ * q0_ - u02_ * u02_) * (u02_ * u02_ - q0_ * q0_ * ct * ct) / (u02_ * u02_ * st * st);
        s.u3 = std::copysign(std::sqrt(std::max(0.0, u3sq)), u03_);
        if (u03_ == 0.0) s.u3 = 0.0;
    }
    return s;
}

BeltramiFlow beltrami_closed_form(const ProblemOneInit& init) {
    const RegimeClassification rc = classify_initial(init);
    if (rc.kind != RegimeCase::BeltramiG2Zero)
        throw WrongCaseError("closed form requires g2(theta0) = 0 within tolerance");
    const FlowState& s = init.state0;
    const double half_pi = 0.5 * std::numbers::pi;
    if (std::fabs(s.theta - half_pi) < 1e-12) {
        if (std::fabs(s.u1) > 1e-12 * std::fabs(s.u2))
            throw WrongCaseError("equator data requires U1(theta0) = 0");
        return BeltramiFlow(BeltramiFlow::Case::EquatorData, half_pi, 0.0, s.u2, s.u3, s.rho,
                            s.entropy_a);
    }
    if (!(s.theta < half_pi) || !(s.u1 > 0.0) || !(s.u2 < 0.0))
        throw WrongCaseError("ray data requires theta0 in (0,pi/2), U1 > 0, U2 < 0");
    return BeltramiFlow(BeltramiFlow::Case::RayData, s.theta, s.u1, s.u2, s.u3, s.rho,
                        s.entropy_a);
}

void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
    CsvWriter csv(os, {"theta", "rho", "u1", "u2", "u3", "entropy_a", "bernoulli", "sound_speed",
                       "mach1", "mach2", "mach3", "mach_sq", "g1", "g2", "g3"});
    for (const auto& smp : tr.samples) {
        const FlowState& s = smp.state;
        const DerivedState& d = smp.derived;
        csv.row(std::array{s.theta, s.rho, s.u1, s.u2, s.u3, s.entropy_a, d.bernoulli,
                           d.sound_speed, d.mach1, d.mach2, d.mach3, d.mach_sq_total, d.g1, d.g2,
                           d.g3});
    }
}

}  // namespace coneflow
