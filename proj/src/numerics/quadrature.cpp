#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>

#include "wscav/numerics.hpp"

namespace wscav::numerics {

namespace {

// Kronrod nodes (positive half, descending) and weights; Gauss weights sit on odd indices.
constexpr double xgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                           0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                           0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                           0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double wgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                           0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                           0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                           0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double wg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                          0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a, b;
    Eigen::VectorXd value, error;
    double key;
    bool operator<(const Panel& o) const { return key < o.key; }
};

Panel rule(const VecIntegrand& f, int dim, double a, double b, Eigen::VectorXd& buf) {
    const double c = 0.5 * (a + b), hl = 0.5 * (b - a);
    Eigen::VectorXd k = Eigen::VectorXd::Zero(dim), g = Eigen::VectorXd::Zero(dim);
    f(c, buf);
    k += wgk[7] * buf;
    g += wg[3] * buf;
    for (int j = 0; j < 7; ++j) {
        const double dx = hl * xgk[j];
        f(c - dx, buf);
        k += wgk[j] * buf;
        if (j % 2 == 1) g += wg[j / 2] * buf;
        f(c + dx, buf);
        k += wgk[j] * buf;
        if (j % 2 == 1) g += wg[j / 2] * buf;
    }
    Panel p{a, b, hl * k, (hl * (k - g)).cwiseAbs(), 0.0};
    p.key = p.error.maxCoeff();
    return p;
}

}  // namespace

QuadResult integrate_gk15(const VecIntegrand& f, int dim, std::span<const double> breakpoints,
                          const QuadOptions& opt) {
    if (breakpoints.size() < 2) throw ConfigError("integrate_gk15: need at least two breakpoints");
    Eigen::VectorXd buf(dim);
    std::priority_queue<Panel> heap;
    QuadResult res;
    res.value = Eigen::VectorXd::Zero(dim);
    res.error = Eigen::VectorXd::Zero(dim);
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        if (!(breakpoints[i + 1] > breakpoints[i]))
            throw ConfigError("integrate_gk15: breakpoints must increase");
        Panel p = rule(f, dim, breakpoints[i], breakpoints[i + 1], buf);
        res.value += p.value;
        res.error += p.error;
        heap.push(std::move(p));
        res.evaluations += 15;
    }
    std::vector<double> trace;
    while (res.error.maxCoeff() > opt.abs_tol) {
        if (static_cast<int>(heap.size()) >= opt.max_intervals) {
            std::ostringstream os;
            os << "integrate_gk15: no convergence after " << heap.size()
               << " intervals; error trace (every 1000 splits):";
            for (double e : trace) os << ' ' << e;
            os << " final " << res.error.maxCoeff() << " > tol " << opt.abs_tol;
            throw NumericalError(os.str());
        }
        Panel worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        Panel l = rule(f, dim, worst.a, mid, buf);
        Panel r = rule(f, dim, mid, worst.b, buf);
        res.evaluations += 30;
        res.value += l.value + r.value - worst.value;
        res.error += l.error + r.error - worst.error;
        res.error = res.error.cwiseMax(0.0);
        heap.push(std::move(l));
        heap.push(std::move(r));
        if (heap.size() % 1000 == 0) trace.push_back(res.error.maxCoeff());
    }
    // Recompute the totals from the final partition to shed the running-sum drift.
    res.value.setZero();
    res.error.setZero();
    res.intervals = static_cast<int>(heap.size());
    while (!heap.empty()) {
        res.value += heap.top().value;
        res.error += heap.top().error;
        heap.pop();
    }
    return res;
}

double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
    if (panels < 2 || panels % 2) throw ConfigError("simpson: panels must be even and >= 2");
    const double h = (b - a) / panels;
    double s = f(a) + f(b);
    for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

}  // namespace wscav::numerics
