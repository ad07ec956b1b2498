#include "wscav/upa.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>
#include <sstream>

#include "wscav/error.hpp"
#include "wscav/parallel.hpp"

namespace wscav {

using cd = std::complex<double>;

UpaCoefficients upa_coefficients(const CouplingMatrix& j, double v, double beta, double n_atoms) {
    if (!j.contains(-1) || !j.contains(1))
        throw ConfigError("upa_coefficients: coupling matrix must cover sites -1..1");
    if (!(n_atoms > 0.0)) throw ConfigError("upa_coefficients: atom number must be positive");
    if (beta < 0.0) throw ConfigError("upa_coefficients: beta must be >= 0");
    UpaCoefficients c;
    c.v = v;
    c.beta = beta;
    c.n_atoms = n_atoms;
    c.j00 = j(0, 0);
    const double u = 1.0 + beta * c.j00;
    c.v1 = 2.0 * v / (u * u);
    c.v2 = -(v * beta / n_atoms) / (u * u * u);
    const double d1 = j.delta(1), dm = j.delta(-1);
    const double op = j(0, 1), om = j(-1, 0);
    c.delta = 0.5 * (d1 + dm);
    c.omega = 0.5 * (op - om);
    c.omega_asymmetry = op != 0.0 ? std::abs(op + om) / std::abs(op) : 0.0;
    c.delta_asymmetry = d1 != 0.0 ? std::abs(d1 - dm) / std::abs(d1) : 0.0;

    // Stationary point of a n_1 + b n_-1 + g (X_1 - X_-1)^2 + L (X_1 - X_-1).
    c.linear = 0.5 * c.v1 * std::sqrt(n_atoms) * c.omega;
    const double a = 1.0 + c.v1 * c.delta, b = -1.0 + c.v1 * c.delta;
    const double g = c.pair_coupling();
    const double den = a * b + 4.0 * g * (a + b);
    const double scale = std::max({std::abs(a * b), std::abs(4.0 * g * (a + b)), 1e-300});
    if (std::abs(den) < 1e-12 * scale) {
        std::ostringstream os;
        os << "upa_coefficients: displacement resonance (V1*Delta)^2 - 1 + 8 g V1 Delta = " << den
           << " at V=" << v << ", beta=" << beta;
        throw NumericalError(os.str());
    }
    if (c.linear == 0.0) {
        c.alpha_plus = c.alpha_minus = 0.0;
    } else {
        c.alpha_plus = -c.linear * b / den;
        c.alpha_minus = c.linear * a / den;
    }
    return c;
}

Eigen::Matrix4d bdg_matrix(const UpaCoefficients& c, double omega_b) {
    const double a = omega_b + c.v1 * c.delta, b = -omega_b + c.v1 * c.delta;
    const double g = c.pair_coupling();
    const double g2 = 2.0 * g;
    Eigen::Matrix4d m;
    m << a + g2, -g2, g2, -g2,
         -g2, b + g2, -g2, g2,
         -g2, g2, -(a + g2), g2,
         g2, -g2, g2, -(b + g2);
    return m;
}

BdGSpectrum classify_stability(const Eigen::Matrix4d& m, double threshold) {
    Eigen::EigenSolver<Eigen::Matrix4d> es(m, false);
    if (es.info() != Eigen::Success) throw NumericalError("classify_stability: eigensolver failed");
    BdGSpectrum s;
    s.eigenvalues = es.eigenvalues();
    double mx = 0.0;
    for (int i = 0; i < 4; ++i) mx = std::max(mx, std::abs(s.eigenvalues[i].imag()));
    s.growth_rate = mx;  // eigenvalues come in conjugate pairs
    s.amplifying = mx > threshold;
    return s;
}

UpaEvolution evolve_upa(const UpaCoefficients& c, double horizon, double dt) {
    if (!(horizon > 0.0) || !(dt > 0.0)) throw ConfigError("evolve_upa: bad horizon or step");
    const Eigen::Matrix4cd m = bdg_matrix(c).cast<cd>();
    const Eigen::Matrix4cd step = (cd(0, -kTwoPi * dt) * m).exp();
    const Eigen::Vector4d eta(1, 1, -1, -1);
    const Eigen::Vector4cd mean0(-c.alpha_plus, -c.alpha_minus, -c.alpha_plus, -c.alpha_minus);
    const double sqn = std::sqrt(c.n_atoms);

    UpaEvolution e;
    const auto k = static_cast<std::size_t>(std::llround(horizon / dt));
    Eigen::Matrix4cd u = Eigen::Matrix4cd::Identity();
    for (std::size_t i = 0; i <= k; ++i) {
        if (i) u = step * u;
        const double t = i * dt;
        const Eigen::Vector4cd mean = u * mean0;
        const cd cp = c.alpha_plus + mean[0], cm = c.alpha_minus + mean[1];
        const double vp = std::norm(u(0, 2)) + std::norm(u(0, 3));
        const double vm = std::norm(u(1, 2)) + std::norm(u(1, 3));
        const double rp = std::norm(cp) + vp, rm = std::norm(cm) + vm;
        e.times.push_back(t);
        e.rho_plus.push_back(rp);
        e.rho_minus.push_back(rm);
        e.n_eff.push_back(c.j00 + 2.0 * c.omega * (cp.real() - cm.real()) / sqn +
                          2.0 * c.delta * (rp + rm) / c.n_atoms);
        if (!std::isfinite(e.breakdown_time) && std::max(rp, rm) / c.n_atoms > 0.1) e.breakdown_time = t;
        const Eigen::Matrix4cd sym = u.adjoint() * eta.cast<cd>().asDiagonal() * u;
        const double err = (sym - Eigen::Matrix4cd(eta.cast<cd>().asDiagonal())).cwiseAbs().maxCoeff();
        e.max_symplectic_error = std::max(e.max_symplectic_error, err);
    }
    return e;
}

double fitted_growth_rate(const UpaEvolution& e, double t_from, double t_to) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < e.times.size(); ++i) {
        if (e.times[i] < t_from || e.times[i] > t_to) continue;
        const double x = kTwoPi * e.times[i], y = std::log(e.rho_plus[i] + e.rho_minus[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 3) throw ConfigError("fitted_growth_rate: window holds fewer than three samples");
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace {

bool amplifying_at(const LatticeSpec& spec, double depth, double v, double beta, double n_atoms,
                   const AmplificationOptions& opt) {
    const auto m = build_lattice_model(spec.with_depth(depth), -1, 1, opt.lattice);
    return classify_stability(bdg_matrix(upa_coefficients(m.coupling, v, beta, n_atoms))).amplifying;
}

double bisect_boundary(const LatticeSpec& spec, double lo, double hi, bool lo_amp, double v,
                       double beta, double n_atoms, const AmplificationOptions& opt) {
    while (hi - lo > opt.boundary_tol) {
        const double mid = 0.5 * (lo + hi);
        if (amplifying_at(spec, mid, v, beta, n_atoms, opt) == lo_amp)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

AmplificationMap amplification_scan(const LatticeSpec& spec, double v,
                                    const std::vector<double>& depth_grid,
                                    const std::vector<double>& beta_grid, double n_atoms,
                                    const AmplificationOptions& opt) {
    if (depth_grid.empty() || beta_grid.empty()) throw ConfigError("amplification_scan: empty grid");
    for (std::size_t i = 1; i < depth_grid.size(); ++i)
        if (!(depth_grid[i] > depth_grid[i - 1]))
            throw ConfigError("amplification_scan: depth grid must increase");
    AmplificationMap map;
    map.v = v;
    map.n_atoms = n_atoms;
    map.depth_grid = depth_grid;
    map.beta_grid = beta_grid;
    const std::size_t nd = depth_grid.size(), nb = beta_grid.size();

    const auto models = parallel_map<CouplingMatrix>(nd, opt.threads, [&](std::size_t i) {
        return build_lattice_model(spec.with_depth(depth_grid[i]), opt.n_min, opt.n_max, opt.lattice).coupling;
    });

    const auto cells = parallel_map<AmplificationCell>(nd * nb, opt.threads, [&](std::size_t i) {
        const std::size_t id = i % nd, ib = i / nd;
        AmplificationCell c;
        c.depth = depth_grid[id];
        c.beta = beta_grid[ib];
        if (!models[id].value) throw NumericalError("couplings failed: " + models[id].error);
        const auto& j = *models[id].value;
        const auto s = classify_stability(bdg_matrix(upa_coefficients(j, v, c.beta, n_atoms)));
        c.amplifying = s.amplifying;
        c.growth_rate = s.growth_rate;
        if (opt.adip_stride > 0 && id % opt.adip_stride == 0 && ib % opt.adip_stride == 0) {
            const auto tr = evolve_atom_only(MeanFieldState::localized(j.n_min, j.n_max, 0), j, v,
                                             c.beta, opt.adip_window);
            c.a_dip = a_dip(tr, opt.adip_window);
        }
        return c;
    });
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i].value) {
            map.cells.push_back(*cells[i].value);
        } else {
            AmplificationCell c;
            c.depth = depth_grid[i % nd];
            c.beta = beta_grid[i / nd];
            c.error = cells[i].error;
            map.cells.push_back(c);
        }
    }

    const auto bounds = parallel_map<BoundaryPoint>(nb, opt.threads, [&](std::size_t ib) {
        BoundaryPoint bp;
        bp.beta = beta_grid[ib];
        const AmplificationCell* row = &map.cells[ib * nd];
        std::size_t i = 1;
        for (; i < nd; ++i)
            if (!row[i - 1].amplifying && row[i].amplifying) break;
        if (i < nd) {
            bp.left = opt.refine_boundary
                          ? bisect_boundary(spec, depth_grid[i - 1], depth_grid[i], false, v, bp.beta, n_atoms, opt)
                          : 0.5 * (depth_grid[i - 1] + depth_grid[i]);
            std::size_t k = i + 1;
            for (; k < nd; ++k)
                if (row[k - 1].amplifying && !row[k].amplifying) break;
            if (k < nd) {
                bp.right = opt.refine_boundary
                               ? bisect_boundary(spec, depth_grid[k - 1], depth_grid[k], true, v, bp.beta, n_atoms, opt)
                               : 0.5 * (depth_grid[k - 1] + depth_grid[k]);
            } else {
                bp.right = std::numeric_limits<double>::infinity();
                bp.right_beyond_grid = true;
            }
        }
        return bp;
    });
    for (const auto& b : bounds) {
        if (!b.value) throw NumericalError("amplification_scan: boundary refinement failed: " + b.error);
        map.boundary.push_back(*b.value);
    }
    return map;
}

}  // namespace wscav
