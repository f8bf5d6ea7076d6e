#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace coneflow {

class BracketError : public std::runtime_error {
  public:
    BracketError(const std::string& what, double a, double b)
        : std::runtime_error(what + " [a=" + std::to_string(a) + ", b=" + std::to_string(b) + "]"),
          a_(a), b_(b) {}
    double a() const { return a_; }
    double b() const { return b_; }

  private:
    double a_, b_;
};

/// Brent's method on a bracketing interval [a, b] with f(a) f(b) <= 0.
template <class F>
double brent(F&& f, double a, double b, double xtol = 1e-13, int max_iter = 200) {
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0.0) throw BracketError("brent: endpoints do not bracket a root", a, b);

    double c = a, fc = fa, d = b - a, e = d;
    for (int it = 0; it < max_iter; ++it) {
        if (std::fabs(fc) < std::fabs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol = 2.0 * 1e-16 * std::fabs(b) + 0.5 * xtol;
        const double m = 0.5 * (c - b);
        if (std::fabs(m) <= tol || fb == 0.0) return b;
        if (std::fabs(e) < tol || std::fabs(fa) <= std::fabs(fb)) {
            d = m; e = m;  // bisect
        } else {
            double p, q;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                const double qq = fa / fc, r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q; else p = -p;
            if (2.0 * p < std::min(3.0 * m * q - std::fabs(tol * q), std::fabs(e * q))) {
                e = d; d = p / q;
            } else {
                d = m; e = m;
            }
        }
        a = b; fa = fb;
        b += (std::fabs(d) > tol) ? d : (m > 0.0 ? tol : -tol);
        fb = f(b);
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a; fc = fa;
            d = b - a; e = d;
        }
    }
    return b;
}

/// Plain bisection; f(a) f(b) <= 0 required.
template <class F>
double bisect(F&& f, double a, double b, double xtol = 1e-10, int max_iter = 200) {
    double fa = f(a);
    if (fa == 0.0) return a;
    double fb = f(b);
    if (fb == 0.0) return b;
    if (fa * fb > 0.0) throw BracketError("bisect: endpoints do not bracket a root", a, b);
    for (int it = 0; it < max_iter && std::fabs(b - a) > xtol; ++it) {
        const double m = 0.5 * (a + b), fm = f(m);
        if (fm == 0.0) return m;
        if ((fm > 0.0) == (fa > 0.0)) {
            a = m; fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

}  // namespace coneflow
