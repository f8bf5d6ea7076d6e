#include "coneflow/background.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include <nlohmann/json.hpp>

#include "coneflow/csvio.hpp"
#include "coneflow/ode45.hpp"
#include "coneflow/rootfind.hpp"

namespace coneflow {

namespace {

struct BgRhs {
    double gamma, b0;
    void operator()(double theta, const std::array<double, 2>& y, std::array<double, 2>& dy) const {
        const double u1 = y[0], u2 = y[1];
        const double c2 = (gamma - 1.0) * (b0 - 0.5 * (u1 * u1 + u2 * u2));
        const double g1 = u1 * std::sin(theta) + u2 * std::cos(theta);
        dy[0] = u2;
        dy[1] = -u1 - g1 * c2 / ((c2 - u2 * u2) * std::sin(theta));
    }
};

// closed-form right-hand sides of the two key identities
double key2_rhs_of(double m1, double m2, double theta, double gamma) {
    const double msq = m1 * m1 + m2 * m2;
    const double om = 1.0 - m2 * m2;
    const double cot = std::cos(theta) / std::sin(theta);
    return (m1 * m2 * (2.0 + (gamma - 1.0) * msq) +
            cot * (2.0 * (1.0 - m1 * m1) + (gamma - 1.0) * m2 * m2 * msq)) /
           (om * om * om);
}

double key3_rhs_of(double m1, double m2, double theta, double gamma) {
    const double om = 1.0 - m2 * m2;
    const double cot = std::cos(theta) / std::sin(theta);
    return (4.0 + (gamma - 3.0) * m2 * m2) * m2 * (m1 + m2 * cot) / (om * om * om);
}

double e1_of(double u1, double u2, double c2, double theta, double gamma) {
    const double m2sq = u2 * u2 / c2;
    const double g1 = u1 * std::sin(theta) + u2 * std::cos(theta);
    return 2.0 * c2 - u2 * u2 +
           (gamma - 1.0) * u1 * m2sq * g1 / ((1.0 - m2sq) * std::sin(theta));
}

double e2_of(double u1, double u2, double c2, double theta, double gamma) {
    const double m2sq = u2 * u2 / c2;
    const double cot = std::cos(theta) / std::sin(theta);
    const double flux = u1 + u2 * cot;
    return (3.0 - gamma) * u2 * flux + (gamma + 1.0) * u2 * flux / (1.0 - m2sq) +
           (c2 - 2.0 * u2 * u2) * cot;
}

}  // namespace

SonicInit canonical_sonic_init(double gamma) {
    SonicInit init;
    init.b0 = 1.0;
    init.theta_so = std::numbers::pi / 4.0;
    const double cstar = std::sqrt(2.0 * (gamma - 1.0) * init.b0 / (gamma + 1.0));
    init.u01 = cstar * std::cos(std::numbers::pi / 4.0);
    init.u02 = cstar * std::sin(std::numbers::pi / 4.0);
    return init;
}

double BackgroundTable::c_sq(double theta) const {
    const double v1 = u1.eval(theta), v2 = u2.eval(theta);
    return (gas.gamma - 1.0) * (b0 - 0.5 * (v1 * v1 + v2 * v2));
}

double BackgroundTable::mach1(double theta) const { return u1.eval(theta) / std::sqrt(c_sq(theta)); }
double BackgroundTable::mach2(double theta) const { return u2.eval(theta) / std::sqrt(c_sq(theta)); }

double BackgroundTable::mach_sq(double theta) const {
    const double v1 = u1.eval(theta), v2 = u2.eval(theta);
    return (v1 * v1 + v2 * v2) / c_sq(theta);
}

double BackgroundTable::rho(double theta) const {
    const double v1 = u1.eval(theta), v2 = u2.eval(theta);
    return density_from_bernoulli(b0, entropy_a, v1 * v1 + v2 * v2, gas);
}

double BackgroundTable::g1(double theta) const {
    return u1.eval(theta) * std::sin(theta) + u2.eval(theta) * std::cos(theta);
}

BackgroundTable solve_background(const SonicInit& init, GasConstants gas,
                                 const BackgroundConfig& config) {
    const double gamma = gas.gamma;
    if (!(gamma > 1.0)) throw ConfigurationError("gamma must exceed 1");
    if (!(init.theta_so > 0.0 && init.theta_so < std::numbers::pi / 2.0))
        throw ConfigurationError("theta_so must lie in (0, pi/2)");
    if (!(init.u01 > 0.0 && init.u02 > 0.0))
        throw ConfigurationError("sonic data requires U01 > 0 and U02 > 0");
    const double cstar_sq = 2.0 * (gamma - 1.0) * init.b0 / (gamma + 1.0);
    const double qsq = init.u01 * init.u01 + init.u02 * init.u02;
    if (std::fabs(qsq - cstar_sq) > 1e-14 * cstar_sq)
        throw ConfigurationError("initial speed must be sonic: |U|^2 = 2(gamma-1)B0/(gamma+1)");

    const BgRhs rhs{gamma, init.b0};
    const double fu1 = config.guard_u_frac * init.u01;
    const double fu2 = config.guard_u_frac * init.u02;

    auto margin = [&](double /*theta*/, const std::array<double, 2>& y) {
        const double c2 = (gamma - 1.0) * (init.b0 - 0.5 * (y[0] * y[0] + y[1] * y[1]));
        const double m1sq = y[0] * y[0] / c2;
        const double m2sq = y[1] * y[1] / c2;
        return std::min({1.0 - m1sq - config.guard_msq, 1.0 - m2sq - config.guard_msq,
                         y[0] - fu1, y[1] - fu2});
    };

    OdeOptions opt;
    opt.rtol = config.rtol;
    opt.atol = config.atol;

    auto march = [&](double target) {
        std::array<double, 2> y0{init.u01, init.u02};
        Dopri5<2> ode(rhs, init.theta_so, y0, target, opt);
        while (true) {
            const StepStatus st = ode.step();
            if (st == StepStatus::FailedMinStep)
                throw ConfigurationError("background integration failed before a guard fired");
            if (margin(ode.t(), ode.y()) <= 0.0) {
                return bisect([&](double t) { return margin(t, ode.eval(t)); }, ode.t_prev(),
                              ode.t(), 1e-12);
            }
            if (st == StepStatus::ReachedEnd) return ode.t();
        }
    };

    const double raw_lo = march(1e-3);
    const double raw_hi = march(std::numbers::pi / 2.0 - 1e-3);
    const double width = raw_hi - raw_lo;
    if (!(width > 1e-3))
        throw ConfigurationError("sign-condition interval collapsed around theta_so");

    BackgroundTable bg;
    bg.gas = gas;
    bg.b0 = init.b0;
    bg.entropy_a = 1.0 / gamma;  // the (3.7) normalization; |M| is independent of it
    bg.theta_so = init.theta_so;
    bg.theta_minus = raw_lo + config.trim_frac * width;
    bg.theta_plus = raw_hi - config.trim_frac * width;

    const int n_dense = config.n_samples * config.dense_factor;
    bg.dense_grid.resize(static_cast<std::size_t>(n_dense));
    for (int i = 0; i < n_dense; ++i)
        bg.dense_grid[static_cast<std::size_t>(i)] =
            bg.theta_minus + (bg.theta_plus - bg.theta_minus) * i / double(n_dense - 1);
    bg.grid.resize(static_cast<std::size_t>(config.n_samples));
    for (int i = 0; i < config.n_samples; ++i)
        bg.grid[static_cast<std::size_t>(i)] =
            bg.theta_minus + (bg.theta_plus - bg.theta_minus) * i / double(config.n_samples - 1);

    // fill the dense grid by stepping exactly onto each node
    std::vector<double> v1(bg.dense_grid.size()), v2(bg.dense_grid.size());
    const auto i_so = static_cast<std::size_t>(
        std::upper_bound(bg.dense_grid.begin(), bg.dense_grid.end(), init.theta_so) -
        bg.dense_grid.begin());  // first node above theta_so
    {
        std::array<double, 2> y{init.u01, init.u02};
        double t = init.theta_so;
        for (std::size_t i = i_so; i-- > 0;) {
            if (integrate_to<2>(rhs, t, y, bg.dense_grid[i], opt) != StepStatus::ReachedEnd)
                throw ConfigurationError("background resampling failed (down sweep)");
            t = bg.dense_grid[i];
            v1[i] = y[0];
            v2[i] = y[1];
        }
    }
    {
        std::array<double, 2> y{init.u01, init.u02};
        double t = init.theta_so;
        for (std::size_t i = i_so; i < bg.dense_grid.size(); ++i) {
            if (integrate_to<2>(rhs, t, y, bg.dense_grid[i], opt) != StepStatus::ReachedEnd)
                throw ConfigurationError("background resampling failed (up sweep)");
            t = bg.dense_grid[i];
            v1[i] = y[0];
            v2[i] = y[1];
        }
    }
    bg.u1 = CubicSpline(bg.dense_grid, v1);
    bg.u2 = CubicSpline(bg.dense_grid, v2);

    if (std::fabs(bg.mach_sq(init.theta_so) - 1.0) > 1e-10)
        throw ConfigurationError("sonic point verification failed");
    return bg;
}

CoefficientTable coefficients(const BackgroundTable& bg) {
    CoefficientTable ct;
    ct.bg = &bg;
    const double gamma = bg.gas.gamma;

    const auto& gd = bg.dense_grid;
    const std::size_t nd = gd.size();
    std::vector<double> mm(nd), k11(nd), k2(nd), k33(nd), ratio(nd), robin(nd), e1a(nd);
    std::vector<double> a11d(nd), a12d(nd), a22d(nd), e1d(nd), e2d(nd);
    for (std::size_t i = 0; i < nd; ++i) {
        const double th = gd[i];
        const double u1 = bg.u1.eval(th), u2 = bg.u2.eval(th);
        const double c2 = (gamma - 1.0) * (bg.b0 - 0.5 * (u1 * u1 + u2 * u2));
        const double m1sq = u1 * u1 / c2, m2sq = u2 * u2 / c2;
        const double om = 1.0 - m2sq;
        a11d[i] = c2 - u1 * u1;
        a12d[i] = -u1 * u2;
        a22d[i] = c2 - u2 * u2;
        e1d[i] = e1_of(u1, u2, c2, th, gamma);
        e2d[i] = e2_of(u1, u2, c2, th, gamma);
        mm[i] = u1 * u2 / (c2 * om);
        k11[i] = (1.0 - m1sq - m2sq) / (om * om);
        k2[i] = e2d[i] / a22d[i];
        k33[i] = 1.0 / om;
        ratio[i] = a12d[i] / a22d[i];
        robin[i] = k2[i] + 2.0 * ratio[i];
        e1a[i] = e1d[i] / a22d[i];
    }
    ct.s_mm = CubicSpline(gd, mm);
    ct.s_k11 = CubicSpline(gd, k11);
    ct.s_k2 = CubicSpline(gd, k2);
    ct.s_k33 = CubicSpline(gd, k33);
    ct.s_e1_over_a22 = CubicSpline(gd, e1a);
    ct.s_robin_coeff = CubicSpline(gd, robin);
    ct.s_a11 = CubicSpline(gd, a11d);
    ct.s_a12 = CubicSpline(gd, a12d);
    ct.s_a22 = CubicSpline(gd, a22d);
    ct.s_e1 = CubicSpline(gd, e1d);
    ct.s_e2 = CubicSpline(gd, e2d);

    // f = exp(int_{theta_so} a12/a22)
    CubicSpline s_ratio(gd, ratio);
    const double base = s_ratio.integral(bg.theta_so);
    std::vector<double> fv(nd);
    for (std::size_t i = 0; i < nd; ++i) fv[i] = std::exp(s_ratio.integral(gd[i]) - base);
    ct.s_f = CubicSpline(gd, fv);

    const auto& g = bg.grid;
    const std::size_t n = g.size();
    ct.a11.resize(n); ct.a12.resize(n); ct.a22.resize(n);
    ct.e1.resize(n); ct.e2.resize(n);
    ct.f.resize(n); ct.fp_over_f.resize(n);
    ct.k11.resize(n); ct.k2.resize(n); ct.k33.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double th = g[i];
        ct.a11[i] = ct.s_a11.eval(th);
        ct.a12[i] = ct.s_a12.eval(th);
        ct.a22[i] = ct.s_a22.eval(th);
        ct.e1[i] = ct.s_e1.eval(th);
        ct.e2[i] = ct.s_e2.eval(th);
        ct.f[i] = ct.s_f.eval(th);
        ct.fp_over_f[i] = ct.a12[i] / ct.a22[i];
        ct.k11[i] = ct.s_k11.eval(th);
        ct.k2[i] = ct.s_k2.eval(th);
        ct.k33[i] = ct.s_k33.eval(th);
    }
    return ct;
}

IdentityReport verify_identities(const CoefficientTable& ct) {
    const BackgroundTable& bg = *ct.bg;
    const double gamma = bg.gas.gamma;
    IdentityReport rep;

    double key2_rhs_max = 0.0, key2_abs = 0.0, key3_rhs_max = 0.0, key3_abs = 0.0;
    rep.key2_min = 1e300;
    rep.key3_min = 1e300;
    for (std::size_t i = 0; i < bg.grid.size(); ++i) {
        const double th = bg.grid[i];
        const double m1 = bg.mach1(th), m2 = bg.mach2(th);
        const double om = 1.0 - m2 * m2;
        const double mmv = m1 * m2 / om;

        const double k1 = 2.0 * (1.0 - m1 * m1) / om - m1 * m1 * m2 * m2 / (om * om) -
                          ct.s_mm.deriv(th) - mmv * ct.k2[i] - ct.e1[i] / ct.a22[i];
        rep.max_k1 = std::max(rep.max_k1, std::fabs(k1));

        const double lhs2 = ct.s_k11.deriv(th) + 2.0 * ct.k11[i] * ct.k2[i];
        const double rhs2 = key2_rhs_of(m1, m2, th, gamma);
        key2_abs = std::max(key2_abs, std::fabs(lhs2 - rhs2));
        key2_rhs_max = std::max(key2_rhs_max, std::fabs(rhs2));
        rep.key2_min = std::min(rep.key2_min, std::min(lhs2, rhs2));

        const double cot = std::cos(th) / std::sin(th);
        const double lhs3 = ct.s_k33.deriv(th) + 2.0 * ct.k33[i] * (ct.k2[i] - cot);
        const double rhs3 = key3_rhs_of(m1, m2, th, gamma);
        key3_abs = std::max(key3_abs, std::fabs(lhs3 - rhs3));
        key3_rhs_max = std::max(key3_rhs_max, std::fabs(rhs3));
        rep.key3_min = std::min(rep.key3_min, std::min(lhs3, rhs3));
    }
    rep.key2_max_rel = key2_abs / key2_rhs_max;
    rep.key3_max_rel = key3_abs / key3_rhs_max;

    // spline derivatives against 4th-order central differences on the dense grid
    const auto& gd = bg.dense_grid;
    const double h = gd[1] - gd[0];
    auto fd_check = [&](const CubicSpline& s) {
        double worst = 0.0, scale = 1.0;
        for (std::size_t i = 2; i + 2 < gd.size(); ++i) {
            const double fd = (8.0 * (s.eval(gd[i + 1]) - s.eval(gd[i - 1])) -
                               (s.eval(gd[i + 2]) - s.eval(gd[i - 2]))) /
                              (12.0 * h);
            worst = std::max(worst, std::fabs(s.deriv(gd[i]) - fd));
            scale = std::max(scale, std::fabs(fd));
        }
        return worst / scale;
    };
    rep.deriv_agreement =
        std::max({fd_check(ct.s_mm), fd_check(ct.s_k11), fd_check(ct.s_k33), fd_check(ct.s_f)});

    rep.passed = rep.max_k1 < rep.tol_k1 && rep.key2_max_rel < rep.tol_key &&
                 rep.key3_max_rel < rep.tol_key && rep.key2_min > 0.0 && rep.key3_min > 0.0 &&
                 rep.deriv_agreement < rep.tol_deriv;
    return rep;
}

IdentityReport require_identities(const CoefficientTable& ct) {
    IdentityReport rep = verify_identities(ct);
    if (!rep.passed) throw IdentityError("background identity suite failed: " + identity_report_json(rep));
    return rep;
}

std::string identity_report_json(const IdentityReport& rep) {
    nlohmann::json j;
    j["max_k1"] = rep.max_k1;
    j["key2_max_rel"] = rep.key2_max_rel;
    j["key2_min"] = rep.key2_min;
    j["key3_max_rel"] = rep.key3_max_rel;
    j["key3_min"] = rep.key3_min;
    j["deriv_agreement"] = rep.deriv_agreement;
    j["tolerances"] = {{"k1", rep.tol_k1}, {"key", rep.tol_key}, {"deriv", rep.tol_deriv}};
    j["passed"] = rep.passed;
    return j.dump(2);
}

MultiplierTable build_multiplier(const CoefficientTable& ct, double d1_at_sonic) {
    if (!(d1_at_sonic > 0.0)) throw ConfigurationError("d1(theta_so) must be positive");
    const BackgroundTable& bg = *ct.bg;
    const double gamma = bg.gas.gamma;
    const auto& gd = bg.dense_grid;
    const std::size_t nd = gd.size();

    MultiplierTable mt;
    mt.coeffs = &ct;
    mt.d1_at_sonic = d1_at_sonic;

    // d1 = d1(so) exp(int k2), d2' = 2 k2 d2 - 2 d* via the closed form
    const double p_base = ct.s_k2.integral(bg.theta_so);
    std::vector<double> pv(nd), d1v(nd), em2p(nd);
    for (std::size_t i = 0; i < nd; ++i) {
        pv[i] = ct.s_k2.integral(gd[i]) - p_base;
        d1v[i] = d1_at_sonic * std::exp(pv[i]);
        em2p[i] = std::exp(-2.0 * pv[i]);
    }
    mt.d_star = 4.0;
    for (double v : d1v) mt.d_star = std::max(mt.d_star, std::fabs(v));

    CubicSpline s_em2p(gd, em2p);
    const double j_base = s_em2p.integral(bg.theta_so);

    std::vector<double> d2v(nd), kt1(nd), phi(nd);
    std::vector<double> m1v(nd), m2v(nd);
    for (std::size_t i = 0; i < nd; ++i) {
        m1v[i] = bg.mach1(gd[i]);
        m2v[i] = bg.mach2(gd[i]);
    }
    double d2_so = 8.0;
    for (int iter = 0;; ++iter) {
        if (iter > 40)
            throw ConfigurationError("doubling search for d2(theta_so) exceeded its cap");
        bool ok = true;
        for (std::size_t i = 0; i < nd; ++i) {
            const double jv = s_em2p.integral(gd[i]) - j_base;
            d2v[i] = std::exp(2.0 * pv[i]) * (d2_so - 2.0 * mt.d_star * jv);
            const double k11 = ct.s_k11.eval(gd[i]);
            const double k33 = ct.s_k33.eval(gd[i]);
            kt1[i] = 0.5 * (key2_rhs_of(m1v[i], m2v[i], gd[i], gamma) * d2v[i] -
                            k11 * (2.0 * mt.d_star + d1v[i]));
            phi[i] = key3_rhs_of(m1v[i], m2v[i], gd[i], gamma) * d2v[i] -
                     k33 * (2.0 * mt.d_star + d1v[i]);
            if (!(d2v[i] > 0.0) || kt1[i] < 2.0 || phi[i] < 2.0) ok = false;
        }
        if (ok) break;
        d2_so *= 2.0;
    }
    mt.d2_at_sonic = d2_so;
    mt.s_d1 = CubicSpline(gd, d1v);
    mt.s_d2 = CubicSpline(gd, d2v);

    // l1, l2, the quadratic forms, and K4 on the dense grid
    std::vector<double> l1v(nd), l2v(nd), k4v(nd);
    for (std::size_t i = 0; i < nd; ++i) {
        const double fv = ct.s_f.eval(gd[i]);
        const double a22 = ct.s_a22.eval(gd[i]);
        const double fpf = ct.s_a12.eval(gd[i]) / a22;
        l1v[i] = (fpf * d2v[i] - d1v[i]) / (fv * a22);
        l2v[i] = d2v[i] / (fv * a22);
        const double k11 = ct.s_k11.eval(gd[i]);
        k4v[i] = -(d1v[i] * d1v[i] + d2v[i] * d2v[i] * k11) /
                 (fv * (fpf * d2v[i] - d1v[i]));
    }
    mt.s_l1 = CubicSpline(gd, l1v);
    mt.s_l2 = CubicSpline(gd, l2v);
    mt.s_k4 = CubicSpline(gd, k4v);

    // report-grid columns + definition-vs-proof cross-check for K1..K3
    const auto& g = bg.grid;
    const std::size_t n = g.size();
    mt.d1.resize(n); mt.d2.resize(n); mt.l1.resize(n); mt.l2.resize(n);
    mt.ktilde1.resize(n); mt.ktilde2.resize(n); mt.ktilde3.resize(n);
    mt.k1q.resize(n); mt.k2q.resize(n); mt.k3q.resize(n); mt.k4q.resize(n);
    mt.phi_mode.resize(n);

    std::vector<double> a11l2(nd), a12l1(nd), a22l1(nd), a22l2(nd);
    for (std::size_t i = 0; i < nd; ++i) {
        a11l2[i] = ct.s_a11.eval(gd[i]) * l2v[i];
        a12l1[i] = ct.s_a12.eval(gd[i]) * l1v[i];
        a22l1[i] = ct.s_a22.eval(gd[i]) * l1v[i];
        a22l2[i] = ct.s_a22.eval(gd[i]) * l2v[i];
    }
    CubicSpline s_a11l2(gd, a11l2), s_a12l1(gd, a12l1), s_a22l1(gd, a22l1), s_a22l2(gd, a22l2);

    double worst_cross = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double th = g[i];
        const double m1 = bg.mach1(th), m2 = bg.mach2(th);
        const double d1 = mt.s_d1.eval(th), d2 = mt.s_d2.eval(th);
        const double fv = ct.s_f.eval(th);
        const double fpf = ct.a12[i] / ct.a22[i];
        mt.d1[i] = d1;
        mt.d2[i] = d2;
        mt.l1[i] = mt.s_l1.eval(th);
        mt.l2[i] = mt.s_l2.eval(th);
        mt.ktilde2[i] = ct.k2[i] * d1 - mt.s_d1.deriv(th);
        mt.ktilde3[i] = mt.d_star - 0.5 * d1;
        mt.ktilde1[i] = 0.5 * (key2_rhs_of(m1, m2, th, gamma) * d2 -
                               ct.k11[i] * (2.0 * mt.d_star + d1));
        // proof relations
        mt.k1q[i] = mt.ktilde1[i] / fv + fpf * fpf * mt.ktilde3[i] / fv;
        mt.k2q[i] = 2.0 * fpf * mt.ktilde3[i] / fv;
        mt.k3q[i] = mt.ktilde3[i] / fv;
        mt.k4q[i] = mt.s_k4.eval(th);
        mt.phi_mode[i] = key3_rhs_of(m1, m2, th, gamma) * d2 -
                         ct.k33[i] * (2.0 * mt.d_star + d1);

        // defining formulas, mu1 = 3
        const double k1_def = 0.5 * s_a11l2.deriv(th) - 1.5 * ct.a11[i] * mt.l1[i] -
                              s_a12l1.deriv(th) + ct.e1[i] * mt.l1[i];
        const double k2_def = ct.e1[i] * mt.l2[i] + ct.e2[i] * mt.l1[i] - s_a22l1.deriv(th) -
                              2.0 * ct.a11[i] * mt.l2[i];
        const double k3_def = 0.5 * ct.a22[i] * mt.l1[i] + ct.e2[i] * mt.l2[i] -
                              ct.a12[i] * mt.l2[i] - 0.5 * s_a22l2.deriv(th);
        const double scale = std::max({std::fabs(mt.k1q[i]), std::fabs(mt.k2q[i]),
                                       std::fabs(mt.k3q[i]), 1.0});
        worst_cross = std::max({worst_cross, std::fabs(k1_def - mt.k1q[i]) / scale,
                                std::fabs(k2_def - mt.k2q[i]) / scale,
                                std::fabs(k3_def - mt.k3q[i]) / scale});
    }
    if (worst_cross > 1e-4)
        throw IdentityError("K1..K3 defining formulas disagree with the proof relations: " +
                            format_double(worst_cross));

    mt.sigma0 = find_sigma0(ct, mt);
    return mt;
}

double find_sigma0(const CoefficientTable& ct, const MultiplierTable& mt, double safety_floor) {
    const BackgroundTable& bg = *ct.bg;
    if (!(mt.s_k4.eval(bg.theta_so) > 0.0))
        throw IdentityError("K4(theta_so) <= 0 contradicts the boundary decomposition");
    const auto& gd = bg.dense_grid;
    // walk down from theta_so until K4 dips below the floor
    std::size_t i_so = 0;
    while (i_so + 1 < gd.size() && gd[i_so + 1] < bg.theta_so) ++i_so;
    for (std::size_t i = i_so + 1; i-- > 0;) {
        if (mt.s_k4.eval(gd[i]) <= safety_floor) {
            const double cross = bisect(
                [&](double t) { return mt.s_k4.eval(t) - safety_floor; }, gd[i], gd[i + 1], 1e-12);
            return bg.theta_so - cross;
        }
    }
    return bg.theta_so - bg.theta_minus;
}

void write_background_csv(std::ostream& os, const BackgroundTable& bg) {
    CsvWriter csv(os, {"theta", "u1", "u2", "sound_speed", "mach1", "mach2", "mach_sq", "rho", "g1"});
    for (double th : bg.grid) {
        const double c = std::sqrt(bg.c_sq(th));
        csv.row(std::array{th, bg.u1.eval(th), bg.u2.eval(th), c, bg.mach1(th), bg.mach2(th),
                           bg.mach_sq(th), bg.rho(th), bg.g1(th)});
    }
}

void write_coefficients_csv(std::ostream& os, const CoefficientTable& ct,
                            const MultiplierTable* mt) {
    std::vector<std::string> cols{"theta", "a11", "a12", "a22", "e1",  "e2",
                                  "f",     "fp_over_f", "k11", "k2",  "k33"};
    if (mt) {
        for (const char* c : {"d1", "d2", "l1", "l2", "ktilde1", "ktilde2", "ktilde3", "K1", "K2",
                              "K3", "K4", "phi_mode"})
            cols.push_back(c);
    }
    CsvWriter csv(os, cols);
    const auto& g = ct.bg->grid;
    for (std::size_t i = 0; i < g.size(); ++i) {
        std::vector<double> row{g[i],     ct.a11[i], ct.a12[i],       ct.a22[i], ct.e1[i],
                                ct.e2[i], ct.f[i],   ct.fp_over_f[i], ct.k11[i], ct.k2[i],
                                ct.k33[i]};
        if (mt) {
            for (double v : {mt->d1[i], mt->d2[i], mt->l1[i], mt->l2[i], mt->ktilde1[i],
                             mt->ktilde2[i], mt->ktilde3[i], mt->k1q[i], mt->k2q[i], mt->k3q[i],
                             mt->k4q[i], mt->phi_mode[i]})
                row.push_back(v);
        }
        csv.row(row);
    }
}

}  // namespace coneflow
