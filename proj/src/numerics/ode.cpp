#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "wscav/numerics.hpp"

namespace wscav::numerics {

namespace {

// Dormand-Prince tableau
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// dense output
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

}  // namespace

OdeStats integrate_dp45(const OdeRhs& f, Eigen::VectorXd& y, double t0,
                        std::span<const double> sample_times, const OdeObserver& observe,
                        const OdeOptions& opt) {
    OdeStats stats;
    if (sample_times.empty()) return stats;
    for (std::size_t i = 1; i < sample_times.size(); ++i)
        if (!(sample_times[i] > sample_times[i - 1]))
            throw ConfigError("integrate_dp45: sample times must be strictly increasing");
    if (sample_times.front() < t0)
        throw ConfigError("integrate_dp45: first sample precedes the initial time");

    const Eigen::Index n = y.size();
    const double t_end = sample_times.back();
    const double span = std::max(t_end - t0, std::numeric_limits<double>::min());
    const double h_min = opt.min_step * span;
    const double h_max = opt.max_step > 0 ? opt.max_step : span;

    Eigen::VectorXd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), err(n);
    Eigen::VectorXd r1(n), r2(n), r3(n), r4(n), r5(n);

    auto eval = [&](double t, const Eigen::VectorXd& yy, Eigen::VectorXd& out) {
        f(t, yy, out);
        ++stats.rhs_evals;
    };

    double t = t0;
    std::size_t next = 0;
    while (next < sample_times.size() && sample_times[next] == t) {
        observe(next, t, y);
        ++next;
    }
    if (next == sample_times.size()) return stats;

    eval(t, y, k1);

    auto scaled_norm = [&](const Eigen::VectorXd& v, const Eigen::VectorXd& y0,
                           const Eigen::VectorXd& y1) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double sc = opt.atol + opt.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
            s += (v[i] / sc) * (v[i] / sc);
        }
        return std::sqrt(s / std::max<Eigen::Index>(n, 1));
    };

    double h = opt.initial_step;
    if (h <= 0.0) {
        // Hairer's starting-step heuristic
        const double d0 = scaled_norm(y, y, y);
        const double d1n = scaled_norm(k1, y, y);
        double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
        h0 = std::min(h0, h_max);
        ytmp = y + h0 * k1;
        eval(t + h0, ytmp, k2);
        const double d2 = scaled_norm(k2 - k1, y, y) / h0;
        const double dm = std::max(d1n, d2);
        const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
        h = std::min({100 * h0, h1, h_max});
    }

    bool last_rejected = false;
    while (next < sample_times.size()) {
        if (stats.accepted + stats.rejected >= opt.max_steps) {
            std::ostringstream os;
            os << "integrate_dp45: step budget " << opt.max_steps << " exhausted at t=" << t;
            throw IntegrationError(os.str(), t, y);
        }
        if (h < h_min) {
            std::ostringstream os;
            os << "integrate_dp45: step size underflow (h=" << h << ") at t=" << t;
            throw IntegrationError(os.str(), t, y);
        }
        h = std::min(h, t_end - t);
        if (h <= 0) break;

        ytmp = y + h * a21 * k1;
        eval(t + c2 * h, ytmp, k2);
        ytmp = y + h * (a31 * k1 + a32 * k2);
        eval(t + c3 * h, ytmp, k3);
        ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        eval(t + c4 * h, ytmp, k4);
        ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        eval(t + c5 * h, ytmp, k5);
        ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        eval(t + h, ytmp, k6);
        ynew = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
        eval(t + h, ynew, k7);
        err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        const double en = scaled_norm(err, y, ynew);
        if (!std::isfinite(en)) {
            ++stats.rejected;
            h *= 0.2;
            last_rejected = true;
            continue;
        }
        if (en <= 1.0) {
            const double t_new = t + h;
            if (next < sample_times.size() && sample_times[next] <= t_new) {
                r1 = y;
                r2 = ynew - y;
                r3 = h * k1 - r2;
                r4 = r2 - h * k7 - r3;
                r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
                while (next < sample_times.size() && sample_times[next] <= t_new) {
                    const double ts = sample_times[next];
                    if (ts == t_new) {
                        observe(next, ts, ynew);
                    } else {
                        const double th = (ts - t) / h, th1 = 1.0 - th;
                        ytmp = r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
                        observe(next, ts, ytmp);
                    }
                    ++next;
                }
            }
            t = t_new;
            y = ynew;
            k1 = k7;  // FSAL
            ++stats.accepted;
            double fac = en == 0.0 ? 5.0 : 0.9 * std::pow(en, -0.2);
            fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 5.0);
            h = std::min(h * fac, h_max);
            last_rejected = false;
        } else {
            ++stats.rejected;
            h *= std::max(0.2, 0.9 * std::pow(en, -0.2));
            last_rejected = true;
        }
    }
    return stats;
}

}  // namespace wscav::numerics
