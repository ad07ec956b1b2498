#include <algorithm>
#include <cmath>
#include <sstream>

#include "wscav/error.hpp"
#include "wscav/lattice.hpp"

namespace wscav {

namespace {

int support_sites(double y) {
    int k = 1;
    while (k < 400 && (k <= y || std::abs(std::cyl_bessel_j(static_cast<double>(k), y)) > 1e-9)) ++k;
    return k + 3;
}

}  // namespace

std::vector<Eigen::MatrixXd> weighted_overlaps(
    const WannierStarkBasis& basis, const std::vector<std::function<double(double)>>& weights,
    double* error_bound, const QuadratureSettings& qs) {
    const int ns = basis.size();
    const int nw = static_cast<int>(weights.size());
    const int npair = ns * (ns + 1) / 2;
    const int margin = std::max(qs.margin_sites, support_sites(basis.bessel_argument));

    std::vector<double> breaks;
    for (int c = basis.n_min - margin; c <= basis.n_max + margin + 1; ++c)
        breaks.push_back((c - 0.5) * constants::pi);

    auto integrand = [&](double x, Eigen::Ref<Eigen::VectorXd> out) {
        thread_local Eigen::VectorXd phi;
        thread_local Eigen::VectorXcd z;
        phi.resize(ns);
        basis.evaluate(x, phi, z);
        int idx = 0;
        for (int l = 0; l < nw; ++l) {
            const double g = weights[l](x);
            for (int m = 0; m < ns; ++m)
                for (int n = m; n < ns; ++n) out[idx++] = phi[m] * phi[n] * g;
        }
    };
    numerics::QuadOptions qo;
    qo.abs_tol = qs.abs_tol;
    const auto res = numerics::integrate_gk15(integrand, nw * npair, breaks, qo);

    std::vector<Eigen::MatrixXd> mats(nw, Eigen::MatrixXd(ns, ns));
    int idx = 0;
    for (int l = 0; l < nw; ++l)
        for (int m = 0; m < ns; ++m)
            for (int n = m; n < ns; ++n) {
                mats[l](m, n) = res.value[idx];
                mats[l](n, m) = res.value[idx];
                ++idx;
            }
    if (error_bound) *error_bound = res.error.maxCoeff();
    return mats;
}

Eigen::MatrixXd gram_matrix(const WannierStarkBasis& basis, const QuadratureSettings& q) {
    return weighted_overlaps(basis, {[](double) { return 1.0; }}, nullptr, q)[0];
}

CouplingMatrix coupling_matrix(const WannierStarkBasis& basis, double ratio, double x0,
                               const QuadratureSettings& q) {
    if (!(ratio > 0.0)) throw ConfigError("coupling_matrix: wavenumber ratio must be positive");
    CouplingMatrix cm;
    cm.n_min = basis.n_min;
    cm.n_max = basis.n_max;
    cm.wavenumber_ratio = ratio;
    cm.cavity_phase = ratio * x0;
    auto weight = [ratio, x0](double x) {
        const double s = std::sin(ratio * (x + x0));
        return s * s;
    };
    cm.entries = weighted_overlaps(basis, {weight}, &cm.error_bound, q)[0];
    return cm;
}

CouplingMatrix coupling_matrix(const WannierStarkBasis& basis, const LatticeSpec& spec,
                               const QuadratureSettings& q) {
    spec.validate();
    return coupling_matrix(basis, spec.wavenumber_ratio(), spec.k_l() * spec.cavity_offset, q);
}

PhaseResponse phase_response(const WannierStarkBasis& basis, double ratio,
                             const QuadratureSettings& q) {
    PhaseResponse pr;
    pr.n_min = basis.n_min;
    pr.n_max = basis.n_max;
    pr.wavenumber_ratio = ratio;
    auto mats = weighted_overlaps(basis,
                                  {[](double) { return 1.0; },
                                   [ratio](double x) { return std::cos(2.0 * ratio * x); },
                                   [ratio](double x) { return std::sin(2.0 * ratio * x); }},
                                  nullptr, q);
    pr.gram = mats[0];
    pr.a = mats[1].cast<std::complex<double>>() + std::complex<double>(0, 1) * mats[2];
    return pr;
}

CouplingMatrix PhaseResponse::at(double x0) const {
    CouplingMatrix cm;
    cm.n_min = n_min;
    cm.n_max = n_max;
    cm.wavenumber_ratio = wavenumber_ratio;
    cm.cavity_phase = wavenumber_ratio * x0;
    const std::complex<double> e = std::polar(1.0, 2.0 * wavenumber_ratio * x0);
    cm.entries = 0.5 * (gram - (e * a).real());
    return cm;
}

LatticeModel build_lattice_model(const LatticeSpec& spec, int n_min, int n_max,
                                 const LatticeOptions& opt) {
    spec.validate();
    LatticeModel m;
    m.spec = spec;
    m.bands = compute_band_structure(spec, opt.n_bands, opt.n_q);
    m.wannier = std::make_shared<WannierFunction>(m.bands, 0, 0);
    m.j0 = tunneling_rate(m.bands);
    m.basis = build_ws_basis(spec, *m.wannier, m.j0, n_min, n_max, opt.ws);
    m.coupling = coupling_matrix(m.basis, spec, opt.quad);
    return m;
}

double diagonal_spread(const LatticeSpec& spec, double depth, const LatticeOptions& opt) {
    const auto m = build_lattice_model(spec.with_depth(depth), -1, 1, opt);
    const Eigen::VectorXd d = m.coupling.entries.diagonal();
    return d.maxCoeff() - d.minCoeff();
}

MagicDepthResult find_magic_depth(const LatticeSpec& spec, double depth_lo, double depth_hi,
                                  double grid_step, const LatticeOptions& opt) {
    if (!(depth_hi > depth_lo) || depth_lo <= 0.0)
        throw ConfigError("find_magic_depth: need 0 < depth_lo < depth_hi");
    if (!(grid_step > 0.0)) throw ConfigError("find_magic_depth: grid step must be positive");
    MagicDepthResult r;
    const int n = std::max(3, static_cast<int>(std::round((depth_hi - depth_lo) / grid_step)) + 1);
    for (int i = 0; i < n; ++i) {
        const double d = depth_lo + (depth_hi - depth_lo) * i / (n - 1);
        r.scan.emplace_back(d, diagonal_spread(spec, d, opt));
    }
    auto best = std::min_element(r.scan.begin(), r.scan.end(),
                                 [](auto& a, auto& b) { return a.second < b.second; });
    const auto i = static_cast<int>(best - r.scan.begin());
    if (i == 0 || i == n - 1) {
        r.boundary_hit = true;
        r.depth = best->first;
        r.spread = best->second;
        return r;
    }
    auto [xm, fm] = numerics::minimize_brent(
        [&](double d) { return diagonal_spread(spec, d, opt); }, r.scan[i - 1].first,
        r.scan[i + 1].first, 24);
    if (fm <= best->second) {
        r.depth = xm;
        r.spread = fm;
    } else {
        r.depth = best->first;
        r.spread = best->second;
    }
    return r;
}

}  // namespace wscav
