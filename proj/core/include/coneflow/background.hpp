#pragma once

// The smooth irrotational transonic background in the polar angle and the
// full coefficient / multiplier machinery built on top of it: the linearized
// operator coefficients, the de-mixing change of variables, the two key
// identities, the multiplier functions d1/d2 and l1/l2, and the quadratic
// forms K1..K4 with the admissible-boundary margin sigma0.

#include <string>
#include <vector>

#include "coneflow/gas.hpp"
#include "coneflow/spline.hpp"

namespace coneflow {

struct SonicInit {
    double theta_so = 0.0;  // in (0, pi/2)
    double u01 = 0.0;       // > 0
    double u02 = 0.0;       // > 0
    double b0 = 1.0;        // Bernoulli constant
    // invariant: u01^2 + u02^2 = 2(gamma-1) b0 / (gamma+1) to 1e-14
};

SonicInit canonical_sonic_init(double gamma = 1.4);

struct BackgroundConfig {
    double guard_msq = 0.2;     // keep 1 - Mbar_i^2 >= guard_msq
    double guard_u_frac = 0.4;  // keep Ubar_i >= guard_u_frac * Ubar_i(theta_so)
    double trim_frac = 0.02;    // then trim this fraction off each side
    int n_samples = 2048;       // report grid
    int dense_factor = 32;      // internal differentiation grid refinement
    double rtol = 1e-12;
    double atol = 1e-14;
};

class ConfigurationError : public std::runtime_error {
  public:
    explicit ConfigurationError(const std::string& what) : std::runtime_error(what) {}
};

/// Sampled transonic background on the trimmed interval [theta_minus,
/// theta_plus]; evaluation anywhere inside via splines over the dense grid.
struct BackgroundTable {
    GasConstants gas;
    double b0 = 0.0;
    double entropy_a = 0.0;  // A0 implied by the sonic normalization
    double theta_so = 0.0;
    double theta_minus = 0.0;
    double theta_plus = 0.0;

    std::vector<double> grid;        // n_samples points on [theta_minus, theta_plus]
    std::vector<double> dense_grid;  // n_samples * dense_factor points, same span

    CubicSpline u1, u2;  // built on dense_grid

    double c_sq(double theta) const;
    double mach1(double theta) const;
    double mach2(double theta) const;
    double mach_sq(double theta) const;
    double rho(double theta) const;
    double g1(double theta) const;
};

BackgroundTable solve_background(const SonicInit& init, GasConstants gas,
                                 const BackgroundConfig& config = {});

/// Coefficient functions sampled on the background grids. Columns live on
/// the report grid; splines for differentiation live on the dense grid.
struct CoefficientTable {
    const BackgroundTable* bg = nullptr;

    // report grid columns
    std::vector<double> a11, a12, a22, e1, e2, f, fp_over_f, k11, k2, k33;

    // dense-grid splines of everything the machinery differentiates
    CubicSpline s_k11, s_k2, s_k33, s_mm;  // mm = M1 M2 / (1 - M2^2)
    CubicSpline s_f;                       // f itself (normalized at theta_so)
    CubicSpline s_e1_over_a22, s_robin_coeff;  // robin_coeff = k2 + 2 a12/a22
    CubicSpline s_a11, s_a12, s_a22, s_e1, s_e2;

    double eval_f(double theta) const { return s_f.eval(theta); }
};

CoefficientTable coefficients(const BackgroundTable& bg);

struct IdentityReport {
    double max_k1 = 0.0;           // |k1| should vanish identically
    double key2_max_rel = 0.0;     // k11' + 2 k11 k2 vs closed form
    double key2_min = 0.0;         // positivity
    double key3_max_rel = 0.0;     // k33' + 2 k33 (k2 - cot) vs closed form
    double key3_min = 0.0;
    double deriv_agreement = 0.0;  // spline vs finite-difference derivatives
    bool passed = false;

    double tol_k1 = 1e-7;
    double tol_key = 1e-6;
    double tol_deriv = 1e-6;
};

IdentityReport verify_identities(const CoefficientTable& coeffs);

class IdentityError : public std::runtime_error {
  public:
    explicit IdentityError(const std::string& what) : std::runtime_error(what) {}
};

/// Throws IdentityError unless the suite passes.
IdentityReport require_identities(const CoefficientTable& coeffs);

std::string identity_report_json(const IdentityReport& rep);

struct MultiplierTable {
    const CoefficientTable* coeffs = nullptr;
    double d1_at_sonic = 1.0;
    double d2_at_sonic = 0.0;  // found by the doubling search
    double d_star = 4.0;       // max(||d1||_inf, 4)
    double mu1 = 3.0;
    double sigma0 = 0.0;       // K4 > 0 on [theta_so - sigma0, theta_plus]

    // report grid columns
    std::vector<double> d1, d2, l1, l2;
    std::vector<double> ktilde1, ktilde2, ktilde3;
    std::vector<double> k1q, k2q, k3q, k4q;  // quadratic-form coefficients K1..K4
    std::vector<double> phi_mode;            // azimuthal-mode positivity combination

    // splines on the dense grid for the solver
    CubicSpline s_l1, s_l2, s_d1, s_d2, s_k4;

    double k4_at(double theta) const { return s_k4.eval(theta); }
};

MultiplierTable build_multiplier(const CoefficientTable& coeffs, double d1_at_sonic = 1.0);

/// Largest sigma with K4 >= floor on [theta_so - sigma, theta_plus]; grid scan
/// refined by bisection.
double find_sigma0(const CoefficientTable& coeffs, const MultiplierTable& mult,
                   double safety_floor = 1e-10);

/// One column per tabulated function.
void write_background_csv(std::ostream& os, const BackgroundTable& bg);
void write_coefficients_csv(std::ostream& os, const CoefficientTable& coeffs,
                            const MultiplierTable* mult = nullptr);

}  // namespace coneflow
