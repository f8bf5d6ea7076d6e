#include "coneflow/gas.hpp"

#include <cmath>
#include <numbers>

namespace coneflow {

void validate(const FlowState& s) {
    const bool finite = std::isfinite(s.theta) && std::isfinite(s.rho) && std::isfinite(s.u1) &&
                        std::isfinite(s.u2) && std::isfinite(s.u3) && std::isfinite(s.entropy_a);
    if (!finite) throw DomainError("flow state has non-finite fields");
    if (!(s.rho > 0.0)) throw DomainError("rho must be positive");
    if (!(s.entropy_a > 0.0)) throw DomainError("entropy A must be positive");
    if (!(s.theta > 0.0 && s.theta < std::numbers::pi))
        throw DomainError("theta must lie in (0, pi)");
}

double sound_speed_sq(double rho, double entropy_a, GasConstants gas) {
    return entropy_a * gas.gamma * std::pow(rho, gas.gamma - 1.0);
}

double bernoulli(const FlowState& s, GasConstants gas) {
    const double speed_sq = s.u1 * s.u1 + s.u2 * s.u2 + s.u3 * s.u3;
    return 0.5 * speed_sq + sound_speed_sq(s.rho, s.entropy_a, gas) / (gas.gamma - 1.0);
}

DerivedState derive(const FlowState& s, GasConstants gas) {
    validate(s);
    if (!(gas.gamma > 1.0)) throw DomainError("gamma must exceed 1");

    DerivedState d;
    const double c2 = sound_speed_sq(s.rho, s.entropy_a, gas);
    d.pressure = s.entropy_a * std::pow(s.rho, gas.gamma);
    d.sound_speed = std::sqrt(c2);
    const double speed_sq = s.u1 * s.u1 + s.u2 * s.u2 + s.u3 * s.u3;
    d.bernoulli = 0.5 * speed_sq + c2 / (gas.gamma - 1.0);
    d.mach1 = s.u1 / d.sound_speed;
    d.mach2 = s.u2 / d.sound_speed;
    d.mach3 = s.u3 / d.sound_speed;
    d.mach_sq_total = speed_sq / c2;
    const double st = std::sin(s.theta);
    const double ct = std::cos(s.theta);
    d.g1 = s.u1 * st + s.u2 * ct;
    d.g2 = s.u2 * d.g1 + s.u3 * s.u3 * ct;
    d.g3 = s.u1 * ct - s.u2 * st;
    return d;
}

double density_from_bernoulli(double b, double entropy_a, double speed_sq, GasConstants gas) {
    if (!(entropy_a > 0.0)) throw DomainError("entropy A must be positive");
    if (!(gas.gamma > 1.0)) throw DomainError("gamma must exceed 1");
    const double head = b - 0.5 * speed_sq;
    if (!(head > 0.0)) throw VacuumError("B - |U|^2/2 <= 0: cavitation");
    const double inv = 1.0 / (gas.gamma - 1.0);
    return std::pow((gas.gamma - 1.0) / (entropy_a * gas.gamma), inv) * std::pow(head, inv);
}

}  // namespace coneflow
