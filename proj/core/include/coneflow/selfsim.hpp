#pragma once

// Problem I: the initial value problem for the self-similar flow ODE system
// in the polar angle, with event detection at its natural degeneracies, plus
// the closed-form incompressible (Beltrami) family for g2 = 0 data.

#include <array>
#include <iosfwd>
#include <optional>
#include <vector>

#include "coneflow/gas.hpp"
#include "coneflow/ode45.hpp"

namespace coneflow {

struct ProblemOneInit {
    FlowState state0;  // state at theta0 = state0.theta; u2 != 0 required
    GasConstants gas;
};

enum class TerminationKind {
    ReachedEnd,
    PolarVelocityVanishes,   // U2 -> 0 (cone surface)
    SonicPolarDegeneracy,    // M2^2 -> 1
    AxisReached,             // theta -> 0 or pi
    StepFailure,
};

const char* to_string(TerminationKind k);

struct TerminationEvent {
    TerminationKind kind = TerminationKind::ReachedEnd;
    double theta_event = 0.0;
};

struct TrajectorySample {
    FlowState state;
    DerivedState derived;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;  // theta strictly monotone
    bool decreasing_theta = true;
    TerminationEvent termination;
    double b0 = 0.0;  // Bernoulli constant of the data
    double a0 = 0.0;  // entropy constant of the data

    double theta_front() const { return samples.front().state.theta; }
    double theta_back() const { return samples.back().state.theta; }
    double max_bernoulli_drift() const;
    const FlowState& final_state() const { return samples.back().state; }
};

enum class RegimeCase { SupersonicPolar, BeltramiG2Zero, TransitionCase3, Other };

const char* to_string(RegimeCase c);

struct RegimeClassification {
    RegimeCase kind = RegimeCase::Other;
    double one_minus_m2sq = 0.0;
    double g2 = 0.0;
    double u2 = 0.0;
};

struct IntegrationConfig {
    double rtol = 1e-10;
    double atol = 1e-12;
    double u2_guard_rel = 1e-9;    // halt when |U2| < u2_guard_rel * |U2(theta0)|
    double sonic_guard = 1e-9;     // halt when |1 - M2^2| < sonic_guard
    double axis_guard = 1e-8;      // distance from theta = 0 / pi
    double event_theta_tol = 1e-10;
};

/// A singular guard tripped while evaluating the right-hand side directly.
class SingularityError : public std::runtime_error {
  public:
    SingularityError(const std::string& guard, double theta)
        : std::runtime_error("ode rhs singular (" + guard + ") at theta=" + std::to_string(theta)),
          guard_(guard) {}
    const std::string& guard() const { return guard_; }

  private:
    std::string guard_;
};

/// d/dtheta of (U1, U2, U3, rho). A and B are invariants of the system.
/// Throws SingularityError when |U2| or |1 - M2^2| is below the guard.
std::array<double, 4> ode_rhs(double theta, const FlowState& s, GasConstants gas,
                              double u2_guard = 1e-13, double sonic_guard = 1e-13);

RegimeClassification classify_initial(const ProblemOneInit& init);

Trajectory integrate_problem1(const ProblemOneInit& init, double theta_target,
                              const IntegrationConfig& config = {});

/// Closed-form solution of the g2 = 0 family. rho and A stay at their data
/// values; the velocity lives on (theta_min, pi - theta_min).
class BeltramiFlow {
  public:
    enum class Case { RayData, EquatorData };  // theta0 in (0,pi/2) vs theta0 = pi/2

    BeltramiFlow(Case c, double theta0, double u01, double u02, double u03, double rho0,
                 double a0);

    FlowState evaluate(double theta) const;
    double theta_min() const { return theta_min_; }
    Case data_case() const { return case_; }
    double speed() const { return q0_; }

  private:
    Case case_;
    double theta0_, u01_, u02_, u03_, rho0_, a0_, q0_, theta_min_;
};

class WrongCaseError : public std::runtime_error {
  public:
    explicit WrongCaseError(const std::string& what) : std::runtime_error(what) {}
};

/// Requires |g2(theta0)| below the classification tolerance; picks the case
/// from theta0.
BeltramiFlow beltrami_closed_form(const ProblemOneInit& init);

/// theta, rho, U1, U2, U3, A, B, c, M1, M2, M3, |M|^2, g1, g2, g3
void write_trajectory_csv(std::ostream& os, const Trajectory& tr);

}  // namespace coneflow
