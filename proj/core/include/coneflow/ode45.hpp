#pragma once

// Dormand-Prince 5(4) embedded pair with the classic order-4 continuous
// extension. Stepping is exposed one accepted step at a time so callers can
// watch for events on the dense output.

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>

namespace coneflow {

struct OdeOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double h_init = 0.0;   // 0: pick from the interval
    double h_min = 1e-14;  // relative to interval length
    long max_steps = 2'000'000;
};

enum class StepStatus { Ok, ReachedEnd, FailedMinStep };

template <std::size_t N>
class Dopri5 {
  public:
    using Vec = std::array<double, N>;
    using Rhs = std::function<void(double, const Vec&, Vec&)>;

    Dopri5(Rhs rhs, double t0, const Vec& y0, double t_end, OdeOptions opt = {})
        : rhs_(std::move(rhs)), opt_(opt), t_(t0), t_end_(t_end), y_(y0) {
        dir_ = (t_end >= t0) ? 1.0 : -1.0;
        span_ = std::fabs(t_end - t0);
        h_ = opt.h_init > 0.0 ? opt.h_init : span_ / 100.0;
        if (h_ > span_) h_ = span_;
        rhs_(t_, y_, k_[0]);  // FSAL seed
    }

    double t() const { return t_; }
    double t_prev() const { return tp_; }
    const Vec& y() const { return y_; }
    const Vec& y_prev() const { return yp_; }
    bool done() const { return std::fabs(t_ - t_end_) <= 1e-15 * (1.0 + span_); }

    // One accepted step (or termination). After Ok/ReachedEnd the dense
    // output covers [t_prev, t].
    StepStatus step() {
        if (done()) return StepStatus::ReachedEnd;
        const double hmin = opt_.h_min * (span_ + std::fabs(t_));
        for (long attempt = 0; attempt < opt_.max_steps; ++attempt) {
            bool last = false;
            if (h_ >= std::fabs(t_end_ - t_)) {
                h_ = std::fabs(t_end_ - t_);
                last = true;
            }
            const double h = dir_ * h_;
            if (!last && t_ + h == t_) return StepStatus::FailedMinStep;
            Vec y5, err;
            stages(h, y5, err);
            const double e = error_norm(y5, err);
            if (e <= 1.0) {
                tp_ = t_;
                yp_ = y_;
                prepare_dense(h, y5);
                t_ = last ? t_end_ : t_ + h;
                y_ = y5;
                k_[0] = k_[6];  // FSAL
                grow_shrink(e);
                return last ? StepStatus::ReachedEnd : StepStatus::Ok;
            }
            grow_shrink(e);
            if (h_ <= hmin) return StepStatus::FailedMinStep;
        }
        return StepStatus::FailedMinStep;
    }

    // Dense evaluation inside the last accepted step.
    Vec eval(double t) const {
        const double sigma = (t - tp_) / (t_ - tp_);
        Vec out;
        for (std::size_t i = 0; i < N; ++i) {
            out[i] = rc1_[i] +
                     sigma * (rc2_[i] + (1.0 - sigma) * (rc3_[i] + sigma * (rc4_[i] + (1.0 - sigma) * rc5_[i])));
        }
        return out;
    }

  private:
    void stages(double h, Vec& y5, Vec& err) {
        static constexpr double a21 = 1.0 / 5, a31 = 3.0 / 40, a32 = 9.0 / 40, a41 = 44.0 / 45,
                                a42 = -56.0 / 15, a43 = 32.0 / 9, a51 = 19372.0 / 6561,
                                a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729,
                                a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                                a64 = 49.0 / 176, a65 = -5103.0 / 18656, a71 = 35.0 / 384,
                                a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                                a76 = 11.0 / 84;
        static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
        static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                                e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
        Vec w;
        auto comb = [&](std::initializer_list<std::pair<int, double>> terms) {
            for (std::size_t i = 0; i < N; ++i) {
                double s = 0.0;
                for (auto [j, a] : terms) s += a * k_[static_cast<std::size_t>(j)][i];
                w[i] = y_[i] + h * s;
            }
        };
        comb({{0, a21}});
        rhs_(t_ + c2 * h, w, k_[1]);
        comb({{0, a31}, {1, a32}});
        rhs_(t_ + c3 * h, w, k_[2]);
        comb({{0, a41}, {1, a42}, {2, a43}});
        rhs_(t_ + c4 * h, w, k_[3]);
        comb({{0, a51}, {1, a52}, {2, a53}, {3, a54}});
        rhs_(t_ + c5 * h, w, k_[4]);
        comb({{0, a61}, {1, a62}, {2, a63}, {3, a64}, {4, a65}});
        rhs_(t_ + h, w, k_[5]);
        for (std::size_t i = 0; i < N; ++i) {
            y5[i] = y_[i] + h * (a71 * k_[0][i] + a73 * k_[2][i] + a74 * k_[3][i] +
                                 a75 * k_[4][i] + a76 * k_[5][i]);
        }
        rhs_(t_ + h, y5, k_[6]);
        for (std::size_t i = 0; i < N; ++i) {
            err[i] = h * (e1 * k_[0][i] + e3 * k_[2][i] + e4 * k_[3][i] + e5 * k_[4][i] +
                          e6 * k_[5][i] + e7 * k_[6][i]);
        }
    }

    double error_norm(const Vec& y5, const Vec& err) const {
        double s = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sc = opt_.atol + opt_.rtol * std::max(std::fabs(y_[i]), std::fabs(y5[i]));
            const double q = err[i] / sc;
            s += q * q;
        }
        const double e = std::sqrt(s / static_cast<double>(N));
        return std::isfinite(e) ? e : 1e10;
    }

    void grow_shrink(double e) {
        double f = (e <= 0.0) ? 5.0 : 0.9 * std::pow(e, -0.2);
        f = std::min(5.0, std::max(0.2, f));
        h_ *= f;
    }

    void prepare_dense(double h, const Vec& y5) {
        static constexpr double d1 = -12715105075.0 / 11282082432.0,
                                d3 = 87487479700.0 / 32700410799.0,
                                d4 = -10690763975.0 / 1880347072.0,
                                d5 = 701980252875.0 / 199316789632.0,
                                d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double dy = y5[i] - y_[i];
            const double bspl = h * k_[0][i] - dy;
            rc1_[i] = y_[i];
            rc2_[i] = dy;
            rc3_[i] = bspl;
            rc4_[i] = dy - h * k_[6][i] - bspl;
            rc5_[i] = h * (d1 * k_[0][i] + d3 * k_[2][i] + d4 * k_[3][i] + d5 * k_[4][i] +
                           d6 * k_[5][i] + d7 * k_[6][i]);
        }
    }

    Rhs rhs_;
    OdeOptions opt_;
    double t_, t_end_, dir_, span_, h_;
    double tp_ = 0.0;
    Vec y_, yp_{};
    std::array<Vec, 7> k_{};
    Vec rc1_{}, rc2_{}, rc3_{}, rc4_{}, rc5_{};
};

// Convenience driver: integrate to t_end, no events.
template <std::size_t N>
StepStatus integrate_to(typename Dopri5<N>::Rhs rhs, double t0, std::array<double, N>& y,
                        double t_end, OdeOptions opt = {}) {
    Dopri5<N> ode(std::move(rhs), t0, y, t_end, opt);
    while (true) {
        const StepStatus st = ode.step();
        if (st == StepStatus::ReachedEnd) {
            y = ode.y();
            return st;
        }
        if (st == StepStatus::FailedMinStep) {
            y = ode.y();
            return st;
        }
    }
}

}  // namespace coneflow
