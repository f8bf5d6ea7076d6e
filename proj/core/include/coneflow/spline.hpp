#pragma once

#include <cstddef>
#include <vector>

namespace coneflow {

/// Not-a-knot cubic spline on strictly increasing knots.
class CubicSpline {
  public:
    CubicSpline() = default;
    CubicSpline(std::vector<double> x, std::vector<double> y);

    double operator()(double x) const { return eval(x); }
    double eval(double x) const;
    double deriv(double x) const;
    double deriv2(double x) const;
    /// Integral of the spline from x.front() to x.
    double integral(double x) const;

    double x_min() const { return x_.front(); }
    double x_max() const { return x_.back(); }
    std::size_t size() const { return x_.size(); }

  private:
    std::size_t locate(double x) const;

    std::vector<double> x_, y_, m_;    // m_: second derivatives at knots
    std::vector<double> cumint_;       // integral from x_[0] to x_[i]
};

}  // namespace coneflow
