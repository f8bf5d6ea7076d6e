#pragma once

// Problem II: a supersonic self-similar incoming flow hits an infinite
// circular cone and forms an attached conic shock. Rankine-Hugoniot jump,
// shock polar in the (U1, U2) plane, critical angles, downstream integration
// to the cone surface, and the five-way downstream classification.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "coneflow/gas.hpp"
#include "coneflow/selfsim.hpp"

namespace coneflow {

/// Boundary data at theta = pi/2: (rho0, 0, u02 < 0, u03, a0).
struct IncomingFlow {
    double rho0 = 1.0;
    double u02 = -2.0;
    double u03 = 0.0;
    double a0 = 1.0 / 1.4;
    GasConstants gas;

    double c0_sq() const;
    double c0() const;
    double q0_sq() const { return u02 * u02 + u03 * u03; }
    double q0() const;
    double m0_sq() const { return q0_sq() / c0_sq(); }
    double a1_sq() const { return u02 * u02 / c0_sq(); }  // must exceed 1
    double bernoulli0() const;
    void validate() const;  // throws DomainError unless a1^2 > 1 etc.
};

struct CriticalAngles {
    double theta_min = 0.0;     // upstream existence limit, asin(|u03|/q0)
    double under_theta = 0.0;   // weakest admissible shock angle
    double a_sharp_sq = 0.0;    // positive root of h0
    double q_tilde0 = 0.0;      // lower bound -G(0) of the cone radial velocity
    std::optional<double> theta_sharp;  // sonic-behind-shock angle, absent if a#^2 >= a1^2
    std::optional<double> theta_s;      // sonic-on-cone angle (u03 = 0 sweeps only)
};

/// h0 and its root; k(t) whose root gives under_theta.
double h0_of(double tau, double m0_sq, double gamma);
double k_of(double t, const IncomingFlow& inflow);

/// Closed-form upstream flow on (theta_min, pi/2].
class UpstreamFlow {
  public:
    explicit UpstreamFlow(const IncomingFlow& inflow);
    FlowState evaluate(double theta) const;
    double theta_min() const { return theta_min_; }

  private:
    IncomingFlow in_;
    double theta_min_;
};

class WeakShockViolation : public std::runtime_error {
  public:
    explicit WeakShockViolation(const std::string& what) : std::runtime_error(what) {}
};

/// Prandtl factor K(theta) evaluated from the upstream state (continuous
/// across the shock).
double prandtl_k(const FlowState& upstream, GasConstants gas);

/// Downstream state right behind a shock at theta_b via the jump conditions.
/// Requires theta_b in (under_theta, pi/2).
FlowState rh_downstream(const IncomingFlow& inflow, double theta_b);

struct ShockPolarPoint {
    double g = 0.0;        // U2+ = G(U1+)
    double g_prime = 0.0;  // dG/ds > 0
};

/// Shock polar for u03 = 0 incoming data; s = U1+ in [0, q0 cos(under_theta)).
ShockPolarPoint shock_polar(double s, const IncomingFlow& inflow);

/// Closed forms cross-validated against bracketed root solves (throws on
/// disagreement beyond 1e-12 relative).
CriticalAngles critical_angles(const IncomingFlow& inflow);

struct Condition290Report {
    bool holds = false;
    double min_value = 0.0;  // infimum of the quadratic over (0,1)
    double witness_t = 0.0;  // location of the infimum
    bool sufficient_a = false;
    bool sufficient_b = false;
};

/// Admissibility condition for g2+ < 0 behind the shock (vacuous at u03 = 0).
Condition290Report check_condition_290(const IncomingFlow& inflow);

struct ShockSolution {
    double theta_b = 0.0;
    FlowState downstream_at_shock;
    Trajectory downstream;          // from theta_b down to the cone
    double theta_star = 0.0;        // cone angle (U2 -> 0)
    int class_code = 0;             // 1..5, see below
    double pressure_jump = 0.0;     // [p] > 0
    double mach_sq_behind = 0.0;    // |M+|^2 at theta_b
    double mach_sq_cone = 0.0;      // |M+|^2 at theta_star
    double u1_cone = 0.0;           // radial velocity at the cone
};

// class_code:
//   1 supersonic behind the shock, supersonic at the cone
//   2 supersonic behind the shock, sonic at the cone
//   3 supersonic behind the shock, subsonic at the cone
//   4 subsonic behind the shock
//   5 sonic exactly at the shock (shock and sonic front coincide)

struct ShockSolveConfig {
    IntegrationConfig integration{};
    double theta_b_margin = 1e-6;   // refuse theta_b within this of under_theta
    double sonic_tol_shock = 1e-8;  // |M+|^2 - 1 tolerance for class 5
    double sonic_tol_cone = 1e-6;   // |M+|^2 - 1 tolerance for class 2
};

ShockSolution solve_conic_shock(const IncomingFlow& inflow, double theta_b,
                                const ShockSolveConfig& config = {});

struct AppleRow {
    double theta_b = 0.0;
    bool ok = false;
    std::string error;
    double theta_star = 0.0;
    double u1_cone = 0.0;
    int class_code = 0;
    double mach_sq_behind = 0.0;
    double pressure_jump = 0.0;
};

struct AppleSweep {
    std::vector<AppleRow> rows;
    std::optional<double> theta_s;  // located when a sign change appears (u03 = 0)
};

/// Per-point solves over a theta_b grid; point failures are recorded and the
/// sweep continues. For u03 = 0 the sonic-on-cone angle theta_s is located by
/// bisection over theta_b once the sweep brackets it.
AppleSweep apple_curve(const IncomingFlow& inflow, const std::vector<double>& theta_b_grid,
                       const ShockSolveConfig& config = {});

std::vector<double> default_theta_b_grid(const IncomingFlow& inflow, int n);

/// theta_b, theta_star, u1_cone, class_code, mach_sq_behind, pressure_jump
void write_sweep_csv(std::ostream& os, const AppleSweep& sweep);

std::string critical_angles_json(const IncomingFlow& inflow, const CriticalAngles& ca);

}  // namespace coneflow
