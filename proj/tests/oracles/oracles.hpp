#pragma once

// Reference computations used only by the tests. Each one takes a different
// numerical route from the library code it checks.

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

namespace oracle {

// Mathieu characteristic values from the three-term recurrences written as
// continued fractions, solved by bisection. Valid for q >= 0 on the ranges
// used in the tests (a0 in [-2q-1, 0], b1 in [-2q-1, 1]).
namespace detail {
inline double tail(double a, double q, int k0, double (*diag)(int), int depth = 200) {
    double v = 0.0;
    for (int k = k0 + depth; k >= k0; --k) v = q / (a - diag(k) - q * v);
    return v;
}
inline double even_sq(int k) { return 4.0 * k * k; }
inline double odd_sq(int k) { return (2.0 * k + 1) * (2.0 * k + 1); }

inline double bisect(const std::function<double(double)>& f, double lo, double hi) {
    double flo = f(lo);
    if (flo * f(hi) > 0) throw std::runtime_error("oracle: bracket has no sign change");
    for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}
}  // namespace detail

inline double mathieu_a0(double q) {
    if (q == 0.0) return 0.0;
    auto f = [q](double a) {
        const double v2 = detail::tail(a, q, 2, detail::even_sq);
        return a - 2.0 * q * q / (a - 4.0 - q * v2);
    };
    return detail::bisect(f, -2.0 * q - 1.0, 0.0);
}

inline double mathieu_b1(double q) {
    if (q == 0.0) return 1.0;
    auto f = [q](double b) { return b - 1.0 + q - q * detail::tail(b, q, 1, detail::odd_sq); };
    return detail::bisect(f, -2.0 * q - 1.0, 1.0);
}

// Bessel function of the first kind from its power series.
inline double bessel_j(int n, double y) {
    if (n < 0) return (n % 2 ? -1.0 : 1.0) * bessel_j(-n, y);
    double term = std::pow(y / 2.0, n) / std::tgamma(n + 1.0), sum = 0.0;
    for (int k = 0; k < 200; ++k) {
        sum += term;
        term *= -(y * y / 4.0) / ((k + 1.0) * (k + 1.0 + n));
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
}

// Composite Simpson rule on a fixed grid.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
    if (panels % 2) ++panels;
    const double h = (b - a) / panels;
    double s = f(a) + f(b);
    for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

// Harmonic ground state of one lattice well in units x = k_l z. sigma is the
// position spread of |psi|^2, v0^{-1/4} / sqrt(2).
inline double harmonic_ground_state(double x, double v0) {
    const double sigma = std::pow(v0, -0.25) / std::sqrt(2.0);
    return std::pow(2.0 * std::numbers::pi * sigma * sigma, -0.25) * std::exp(-x * x / (4.0 * sigma * sigma));
}

}  // namespace oracle
