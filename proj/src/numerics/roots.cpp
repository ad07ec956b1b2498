#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <cstdint>

#include "wscav/numerics.hpp"

namespace wscav::numerics {

RootScan scan_roots(const std::function<double(double)>& f, double a, double b, int n_scan,
                    double xtol, double merge_tol, double touch_tol) {
    if (!(b > a) || n_scan < 3) throw ConfigError("scan_roots: bad interval or scan density");
    RootScan out;
    out.scan_points = n_scan;
    std::vector<double> xs(n_scan), fs(n_scan);
    for (int i = 0; i < n_scan; ++i) {
        xs[i] = a + (b - a) * i / (n_scan - 1);
        fs[i] = f(xs[i]);
    }
    auto tol = [xtol](double l, double r) { return std::abs(r - l) <= xtol; };
    std::vector<double> roots;
    for (int i = 0; i + 1 < n_scan; ++i) {
        if (fs[i] == 0.0) {
            roots.push_back(xs[i]);
            continue;
        }
        if (fs[i] * fs[i + 1] < 0.0) {
            std::uintmax_t iters = 200;
            auto [l, r] = boost::math::tools::toms748_solve(f, xs[i], xs[i + 1], fs[i], fs[i + 1],
                                                            tol, iters);
            roots.push_back(0.5 * (l + r));
        }
    }
    if (fs.back() == 0.0) roots.push_back(xs.back());

    // tangential zeros: interior local extrema of f that nearly touch zero
    for (int i = 1; i + 1 < n_scan; ++i) {
        const bool is_min = fs[i] <= fs[i - 1] && fs[i] <= fs[i + 1] && fs[i] > 0.0;
        const bool is_max = fs[i] >= fs[i - 1] && fs[i] >= fs[i + 1] && fs[i] < 0.0;
        if (!is_min && !is_max) continue;
        const double sgn = is_min ? 1.0 : -1.0;
        auto [xm, vm] = minimize_brent([&](double x) { return sgn * f(x); }, xs[i - 1], xs[i + 1]);
        if (std::abs(vm) <= touch_tol) out.double_roots.push_back(xm);
    }

    std::sort(roots.begin(), roots.end());
    for (double r : roots)
        if (out.roots.empty() || r - out.roots.back() > merge_tol) out.roots.push_back(r);
    return out;
}

std::pair<double, double> minimize_brent(const std::function<double(double)>& f, double a,
                                         double b, int bits) {
    std::uintmax_t iters = 500;
    auto r = boost::math::tools::brent_find_minima(f, a, b, bits, iters);
    return {r.first, r.second};
}

}  // namespace wscav::numerics
