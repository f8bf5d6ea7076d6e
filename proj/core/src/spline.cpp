#include "coneflow/spline.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace coneflow {

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n) throw std::invalid_argument("spline needs >= 2 matching knots");
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (!(x_[i] < x_[i + 1])) throw std::invalid_argument("spline knots must increase");

    m_.assign(n, 0.0);
    if (n == 3) {
        const double h0 = x_[1] - x_[0], h1 = x_[2] - x_[1];
        const double d0 = (y_[1] - y_[0]) / h0, d1 = (y_[2] - y_[1]) / h1;
        const double m = 2.0 * (d1 - d0) / (h0 + h1);
        m_.assign(n, m);
    } else if (n >= 4) {
        const std::size_t k = n - 2;  // unknowns M_1..M_{n-2}
        std::vector<double> lower(k, 0.0), diag(k, 0.0), upper(k, 0.0), rhs(k, 0.0);
        auto h = [&](std::size_t i) { return x_[i + 1] - x_[i]; };
        auto d = [&](std::size_t i) { return (y_[i + 1] - y_[i]) / h(i); };
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const std::size_t j = i - 1;
            lower[j] = h(i - 1);
            diag[j] = 2.0 * (h(i - 1) + h(i));
            upper[j] = h(i);
            rhs[j] = 6.0 * (d(i) - d(i - 1));
        }
        // fold the not-a-knot end conditions into the first and last rows
        {
            const double h0 = h(0), h1 = h(1);
            diag[0] += h0 * (1.0 + h0 / h1);
            upper[0] -= h0 * h0 / h1;
            lower[0] = 0.0;
        }
        {
            const double hm = h(n - 2), hp = h(n - 3);
            diag[k - 1] += hm * (1.0 + hm / hp);
            lower[k - 1] -= hm * hm / hp;
            upper[k - 1] = 0.0;
        }
        // Thomas algorithm
        for (std::size_t i = 1; i < k; ++i) {
            const double w = lower[i] / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        std::vector<double> sol(k);
        sol[k - 1] = rhs[k - 1] / diag[k - 1];
        for (std::size_t i = k - 1; i-- > 0;) sol[i] = (rhs[i] - upper[i] * sol[i + 1]) / diag[i];
        for (std::size_t i = 0; i < k; ++i) m_[i + 1] = sol[i];
        m_[0] = m_[1] * (1.0 + h(0) / h(1)) - m_[2] * (h(0) / h(1));
        m_[n - 1] = m_[n - 2] * (1.0 + h(n - 2) / h(n - 3)) - m_[n - 3] * (h(n - 2) / h(n - 3));
    }

    cumint_.assign(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double hh = x_[i + 1] - x_[i];
        cumint_[i + 1] = cumint_[i] + 0.5 * hh * (y_[i] + y_[i + 1]) -
                         hh * hh * hh * (m_[i] + m_[i + 1]) / 24.0;
    }
}

std::size_t CubicSpline::locate(double x) const {
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t i = static_cast<std::size_t>(it - x_.begin());
    if (i == 0) return 0;
    if (i >= x_.size()) return x_.size() - 2;
    return i - 1;
}

double CubicSpline::eval(double x) const {
    const std::size_t i = locate(x);
    const double h = x_[i + 1] - x_[i], u = x - x_[i], v = x_[i + 1] - x;
    return m_[i] * v * v * v / (6.0 * h) + m_[i + 1] * u * u * u / (6.0 * h) +
           (y_[i] / h - m_[i] * h / 6.0) * v + (y_[i + 1] / h - m_[i + 1] * h / 6.0) * u;
}

double CubicSpline::deriv(double x) const {
    const std::size_t i = locate(x);
    const double h = x_[i + 1] - x_[i], u = x - x_[i], v = x_[i + 1] - x;
    return -m_[i] * v * v / (2.0 * h) + m_[i + 1] * u * u / (2.0 * h) +
           (y_[i + 1] - y_[i]) / h - (m_[i + 1] - m_[i]) * h / 6.0;
}

double CubicSpline::deriv2(double x) const {
    const std::size_t i = locate(x);
    const double h = x_[i + 1] - x_[i];
    return (m_[i] * (x_[i + 1] - x) + m_[i + 1] * (x - x_[i])) / h;
}

double CubicSpline::integral(double x) const {
    const std::size_t i = locate(x);
    const double h = x_[i + 1] - x_[i], u = x - x_[i], v = x_[i + 1] - x;
    const double part = -m_[i] * (v * v * v * v - h * h * h * h) / (24.0 * h) +
                        m_[i + 1] * u * u * u * u / (24.0 * h) +
                        (y_[i] / h - m_[i] * h / 6.0) * (h * h - v * v) / 2.0 +
                        (y_[i + 1] / h - m_[i + 1] * h / 6.0) * u * u / 2.0;
    return cumint_[i] + part;
}

}  // namespace coneflow
