#pragma once

#include <stdexcept>
#include <string>

namespace coneflow {

/// Polytropic gas, p = A rho^gamma.
struct GasConstants {
    double gamma = 1.4;
};

/// Primitive self-similar unknowns at one polar angle.
/// Velocity components (u1, u2, u3) are radial, polar and azimuthal.
struct FlowState {
    double theta = 0.0;
    double rho = 0.0;
    double u1 = 0.0;
    double u2 = 0.0;
    double u3 = 0.0;
    double entropy_a = 0.0;
};

/// Pointwise quantities derived from a FlowState.
struct DerivedState {
    double pressure = 0.0;
    double sound_speed = 0.0;
    double bernoulli = 0.0;
    double mach1 = 0.0;
    double mach2 = 0.0;
    double mach3 = 0.0;
    double mach_sq_total = 0.0;
    double g1 = 0.0;  // u1 sin(theta) + u2 cos(theta)
    double g2 = 0.0;  // u2 g1 + u3^2 cos(theta)
    double g3 = 0.0;  // u1 cos(theta) - u2 sin(theta)
};

/// Invalid or non-finite inputs.
class DomainError : public std::runtime_error {
  public:
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

/// B - |U|^2/2 <= 0: no positive density exists.
class VacuumError : public std::runtime_error {
  public:
    explicit VacuumError(const std::string& what) : std::runtime_error(what) {}
};

/// Throws DomainError unless rho > 0, entropy_a > 0, 0 < theta < pi and all
/// fields are finite.
void validate(const FlowState& s);

double sound_speed_sq(double rho, double entropy_a, GasConstants gas);
double bernoulli(const FlowState& s, GasConstants gas);

DerivedState derive(const FlowState& s, GasConstants gas);

/// Inverts the Bernoulli relation for the density:
///   rho = ((gamma-1)/(a*gamma))^(1/(gamma-1)) * (b - speed_sq/2)^(1/(gamma-1)).
/// With b = 1 and a = 1/gamma this is the normalized density law
/// rho = (gamma-1)^(1/(gamma-1)) (1 - |U|^2/2)^(1/(gamma-1)) used for the
/// irrotational background.
/// Throws VacuumError when b - speed_sq/2 <= 0.
double density_from_bernoulli(double b, double entropy_a, double speed_sq, GasConstants gas);

}  // namespace coneflow
