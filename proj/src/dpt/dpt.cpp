#include "wscav/dpt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "wscav/error.hpp"
#include "wscav/parallel.hpp"

namespace wscav {

TwoModeParams TwoModeParams::from_coupling(const CouplingMatrix& j) {
    if (!j.contains(-1) || !j.contains(0))
        throw ConfigError("two-mode parameters need sites -1 and 0 in the coupling matrix");
    return {(j(-1, -1) - j(0, 0)) / 2.0, j(-1, 0), (j(-1, -1) + j(0, 0)) / 2.0};
}

double TwoModeParams::radius() const { return std::hypot(omega_x, delta); }

double SpinState::length() const { return std::sqrt(sx * sx + sy * sy + sz * sz); }

std::string to_string(Phase p) {
    switch (p) {
        case Phase::FM: return "FM";
        case Phase::PM: return "PM";
        case Phase::Crossover: return "crossover";
        case Phase::Boundary: return "boundary";
    }
    return "?";
}

namespace {

double g_of(double v, double beta, double n) { return 2.0 * v * n / (1.0 + beta * n); }

std::vector<double> sample_times(double horizon, double dt) {
    if (!(horizon > 0.0)) throw ConfigError("horizon must be positive");
    const auto k = static_cast<std::size_t>(std::llround(horizon / dt));
    std::vector<double> t(k + 1);
    for (std::size_t i = 0; i <= k; ++i) t[i] = i * dt;
    return t;
}

}  // namespace

double spin_energy(const TwoModeParams& p, double v, double beta, const SpinState& s) {
    return -s.sz + g_of(v, beta, p.n_eff(s.sx, s.sz));
}

SpinTrajectory evolve_spin(const TwoModeParams& p, double v, double beta, const SpinState& init,
                           double horizon, const Sampling& smp) {
    if (std::abs(init.length() - 1.0) > 1e-9) throw ConfigError("evolve_spin: |s(0)| must be 1");
    if (beta < 0.0) throw ConfigError("evolve_spin: beta must be >= 0");
    auto rhs = [&](double, const Eigen::VectorXd& s, Eigen::VectorXd& ds) {
        const double n = p.n_eff(s[0], s[2]);
        const double den = 1.0 + beta * n;
        if (den <= 0.0) throw NumericalError("evolve_spin: 1 + beta*n_eff crossed zero");
        const double vt = v / (den * den);
        ds.resize(3);
        ds[0] = (1.0 - 2.0 * p.delta * vt) * s[1];
        ds[1] = (2.0 * p.delta * vt - 1.0) * s[0] - 2.0 * p.omega_x * vt * s[2];
        ds[2] = 2.0 * p.omega_x * vt * s[1];
    };
    SpinTrajectory tr;
    tr.times = sample_times(horizon, smp.dt);
    const std::size_t ns = tr.times.size();
    std::vector<double> phys(ns);
    for (std::size_t i = 0; i < ns; ++i) phys[i] = kTwoPi * tr.times[i];
    tr.s.resize(ns);
    tr.n_eff.resize(ns);

    const double e0 = spin_energy(p, v, beta, init);
    const double n0 = p.n_eff(init.sx, init.sz);
    const bool from_south = std::abs(init.sz + 1.0) < 1e-12;
    EffectivePotential f;
    if (from_south && beta > 0.0) f = effective_potential(p, v, beta, RootInterval::Geometric, 16);
    Eigen::VectorXd y(3);
    y << init.sx, init.sy, init.sz;
    auto observe = [&](std::size_t k, double, const Eigen::VectorXd& s) {
        const SpinState st{s[0], s[1], s[2]};
        tr.s[k] = st;
        tr.n_eff[k] = p.n_eff(st.sx, st.sz);
        tr.max_length_drift = std::max(tr.max_length_drift, std::abs(st.length() - 1.0));
        tr.max_energy_drift = std::max(tr.max_energy_drift, std::abs(spin_energy(p, v, beta, st) - e0));
        if (from_south) {
            const double nd = p.omega_x * st.sy;
            double fv;
            if (beta > 0.0) {
                fv = f(tr.n_eff[k]);
            } else {
                const double sz = -1.0 + 2.0 * v * (tr.n_eff[k] - n0);
                const double sx = (tr.n_eff[k] - p.delta * sz - p.omega_bar) / p.omega_x;
                fv = -p.omega_x * p.omega_x * (1.0 - sx * sx - sz * sz);
            }
            tr.max_reduction_residual = std::max(tr.max_reduction_residual, std::abs(nd * nd + fv));
        }
    };
    numerics::integrate_dp45(rhs, y, 0.0, phys, observe, smp.ode);
    return tr;
}

double EffectivePotential::sz(double n) const { return -1.0 + g_of(v, beta, n) - g_of(v, beta, n0); }

double EffectivePotential::sx(double n) const {
    return (n - p.delta * sz(n) - p.omega_bar) / p.omega_x;
}

double EffectivePotential::operator()(double n) const {
    const double a = sx(n), b = sz(n);
    return -p.omega_x * p.omega_x * (1.0 - a * a - b * b);
}

EffectivePotential effective_potential(const TwoModeParams& p, double v, double beta,
                                       RootInterval mode, int n_scan) {
    if (beta < 0.0) throw ConfigError("effective_potential: beta must be >= 0");
    if (p.omega_x == 0.0) throw ConfigError("effective_potential: omega_x must be nonzero");
    EffectivePotential f;
    f.p = p;
    f.v = v;
    f.beta = beta;
    f.n0 = p.omega_bar - p.delta;
    const double r = p.radius();
    if (mode == RootInterval::Geometric) {
        f.lo = p.omega_bar - r;
        f.hi = p.omega_bar + r;
    } else {
        const double d2 = p.omega_x * p.omega_x - p.delta * p.delta;
        if (d2 < 0.0) {
            std::ostringstream os;
            os << "effective_potential: the compatibility interval needs omega_x^2 >= delta^2 (got "
               << p.omega_x * p.omega_x << " < " << p.delta * p.delta << ")";
            throw ConfigError(os.str());
        }
        f.lo = p.omega_bar - std::sqrt(d2);
        f.hi = p.omega_bar + r;
    }
    if (n_scan <= 16) return f;  // evaluation only
    auto scan = numerics::scan_roots([&f](double n) { return f(n); }, f.lo, f.hi, n_scan, 1e-13,
                                     1e-8, 1e-12 * p.omega_x * p.omega_x);
    f.roots = scan.roots;
    f.double_roots = scan.double_roots;
    f.scan_points = scan.scan_points;
    // n0 is a root by construction; make sure it is listed exactly once
    bool has = false;
    for (double& x : f.roots)
        if (std::abs(x - f.n0) < 1e-8) {
            x = f.n0;
            has = true;
        }
    if (!has && f.n0 >= f.lo && f.n0 <= f.hi) {
        f.roots.push_back(f.n0);
        std::sort(f.roots.begin(), f.roots.end());
    }
    return f;
}

namespace {

int root_count(const TwoModeParams& p, double v, double beta, int n_scan = 2000) {
    return static_cast<int>(effective_potential(p, v, beta, RootInterval::Geometric, n_scan).roots.size());
}

bool admits_four(const TwoModeParams& p, double beta, double v_lo, double v_hi, int n_v, double* v_at) {
    for (int i = 0; i < n_v; ++i) {
        const double v = v_lo + (v_hi - v_lo) * i / (n_v - 1);
        if (root_count(p, v, beta, 1000) >= 4) {
            if (v_at) *v_at = v;
            return true;
        }
    }
    return false;
}

}  // namespace

CriticalBeta critical_beta(const TwoModeParams& p, double v_lo, double v_hi, int n_v,
                           double beta_lo, double beta_hi, double tol) {
    CriticalBeta cb;
    cb.resolution = (v_hi - v_lo) / (n_v - 1);
    double v_at = 0.0;
    if (!admits_four(p, beta_hi, v_lo, v_hi, n_v, &v_at)) return cb;
    if (admits_four(p, beta_lo, v_lo, v_hi, n_v, &v_at)) {
        cb.found = true;
        cb.beta = beta_lo;
        cb.v_at = v_at;
        return cb;
    }
    double lo = beta_lo, hi = beta_hi;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (admits_four(p, mid, v_lo, v_hi, n_v, &v_at)) {
            hi = mid;
            cb.v_at = v_at;
        } else {
            lo = mid;
        }
    }
    cb.found = true;
    cb.beta = hi;
    if (cb.v_at == 0.0) admits_four(p, hi, v_lo, v_hi, n_v, &cb.v_at);
    return cb;
}

PhaseClassification classify_phase(const TwoModeParams& p, double v, double beta,
                                   std::optional<double> beta_critical) {
    if (!(beta > 0.0)) throw ConfigError("classify_phase: beta must be > 0");
    const auto f = effective_potential(p, v, beta);
    PhaseClassification c;
    c.root_count = static_cast<int>(f.roots.size());
    c.n0 = f.n0;
    c.beta_critical = beta_critical ? *beta_critical : critical_beta(p).beta;

    // direction of motion: the side of n0 where f < 0 (s_y^2 > 0)
    const double eps = 1e-7 * (f.hi - f.lo);
    const double fp = f(f.n0 + eps), fm = f(f.n0 - eps);
    if (fp >= 0.0 && fm >= 0.0) {
        c.turning_point = f.n0;  // pinned
    } else {
        const bool up = fp < fm;
        c.turning_point = up ? f.hi : f.lo;
        for (double r : f.roots) {
            if (up && r > f.n0 + 1e-9 && r < c.turning_point) c.turning_point = r;
            if (!up && r < f.n0 - 1e-9 && r > c.turning_point) c.turning_point = r;
        }
    }
    const bool crosses = (c.turning_point - p.omega_bar) * (f.n0 - p.omega_bar) < 0.0;
    c.local_label = crosses ? Phase::PM : Phase::FM;
    for (double d : f.double_roots)
        if ((d - f.n0) * (c.turning_point - f.n0) >= 0.0 &&
            std::abs(d - f.n0) <= std::abs(c.turning_point - f.n0) + 1e-8)
            c.local_label = Phase::Boundary;
    c.label = beta < c.beta_critical ? Phase::Crossover : c.local_label;
    return c;
}

PhaseDiagram phase_diagram(const TwoModeParams& p, const std::vector<double>& v_grid,
                           const std::vector<double>& beta_grid, double horizon, unsigned threads) {
    if (v_grid.empty() || beta_grid.empty()) throw ConfigError("phase_diagram: empty grid");
    PhaseDiagram pd;
    pd.v_grid = v_grid;
    pd.beta_grid = beta_grid;
    pd.beta_critical = critical_beta(p).beta;
    const std::size_t nv = v_grid.size();
    const auto res = parallel_map<PhaseCell>(nv * beta_grid.size(), threads, [&](std::size_t i) {
        PhaseCell c;
        c.v = v_grid[i % nv];
        c.beta = beta_grid[i / nv];
        const auto tr = evolve_spin(p, c.v, c.beta, SpinState{}, horizon);
        double full = 0.0, half = 0.0;
        const std::size_t n = tr.n_eff.size(), nh = n / 2;
        for (std::size_t k = 0; k < n; ++k) {
            full += tr.n_eff[k];
            if (k < nh) half += tr.n_eff[k];
        }
        full /= n;
        half /= std::max<std::size_t>(nh, 1);
        c.order_parameter = full;
        c.half_window_change = std::abs(full - half) / std::max(std::abs(full), 1e-300);
        c.max_n_eff = *std::max_element(tr.n_eff.begin(), tr.n_eff.end());
        if (c.beta > 0.0) {
            const auto cls = classify_phase(p, c.v, c.beta, pd.beta_critical);
            c.root_count = cls.root_count;
            c.label = cls.label;
        } else {
            c.root_count = root_count(p, c.v, 0.0);
            c.label = Phase::Crossover;
        }
        return c;
    });
    pd.cells.reserve(res.size());
    for (std::size_t i = 0; i < res.size(); ++i) {
        if (res[i].value) {
            pd.cells.push_back(*res[i].value);
        } else {
            PhaseCell c;
            c.v = v_grid[i % nv];
            c.beta = beta_grid[i / nv];
            c.error = res[i].error;
            pd.cells.push_back(c);
        }
    }
    return pd;
}

LmgParams lmg_params(const TwoModeParams& p, double v, double beta, double n_atoms) {
    const double r = p.radius();
    if (r == 0.0) throw ConfigError("lmg_params: omega_x = delta = 0 leaves the rotation undefined");
    if (!(n_atoms > 0.0)) throw ConfigError("lmg_params: atom number must be positive");
    LmgParams l;
    l.radius = r;
    l.theta = std::atan2(p.omega_x, p.delta);
    l.chi_n = -4.0 * v * beta * r * r;
    l.chi = l.chi_n / n_atoms;
    l.rabi = p.omega_x / r;
    // first order in beta, including the shift from expanding about omega_bar
    l.detune = p.delta / r - 2.0 * v * (1.0 - 2.0 * beta * p.omega_bar) * r;
    return l;
}

double lmg_cross_coupling(const TwoModeParams& p, double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    return 2.0 * (p.omega_x * c - p.delta * s) * (p.omega_x * s + p.delta * c);
}

SpinTrajectory evolve_lmg(const LmgParams& l, const SpinState& init, double horizon,
                          const Sampling& smp) {
    const double c = std::cos(l.theta), s = std::sin(l.theta);
    auto to_rot = [&](const SpinState& a) {
        return SpinState{c * a.sx - s * a.sz, a.sy, s * a.sx + c * a.sz};
    };
    auto from_rot = [&](const SpinState& a) {
        return SpinState{c * a.sx + s * a.sz, a.sy, -s * a.sx + c * a.sz};
    };
    auto rhs = [&](double, const Eigen::VectorXd& x, Eigen::VectorXd& dx) {
        const double bx = l.rabi, bz = -l.detune + l.chi_n * x[2];
        dx.resize(3);  // ds/dt = B x s
        dx[0] = -bz * x[1];
        dx[1] = bz * x[0] - bx * x[2];
        dx[2] = bx * x[1];
    };
    SpinTrajectory tr;
    tr.times = sample_times(horizon, smp.dt);
    std::vector<double> phys(tr.times.size());
    for (std::size_t i = 0; i < phys.size(); ++i) phys[i] = kTwoPi * tr.times[i];
    tr.s.resize(phys.size());
    const SpinState r0 = to_rot(init);
    Eigen::VectorXd y(3);
    y << r0.sx, r0.sy, r0.sz;
    numerics::integrate_dp45(rhs, y, 0.0, phys, [&](std::size_t k, double, const Eigen::VectorXd& x) {
        tr.s[k] = from_rot(SpinState{x[0], x[1], x[2]});
        tr.max_length_drift = std::max(tr.max_length_drift, std::abs(tr.s[k].length() - 1.0));
    }, smp.ode);
    return tr;
}

}  // namespace wscav
