#include "wscav/experimental.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "wscav/error.hpp"

namespace wscav {

double bloch_frequency(const LatticeSpec& spec) { return spec.bloch_frequency(); }

DecoherenceRates decoherence_rates(double v, double beta, double kappa_over_dc, double gamma_over_d0) {
    auto in_unit = [](double r) { return r > 0.0 && r < 1.0; };
    if (!in_unit(kappa_over_dc) || !in_unit(gamma_over_d0))
        throw ConfigError("decoherence_rates: kappa/Delta_c and gamma/Delta_0 must lie in (0, 1)");
    DecoherenceRates r;
    r.dephasing = v * beta * kappa_over_dc;
    r.scattering = v * gamma_over_d0;
    const double budget = 1.0 / (50.0 * 2.0 * constants::pi);
    r.dephasing_budget = std::abs(r.dephasing) / budget;
    r.scattering_budget = std::abs(r.scattering) / budget;
    return r;
}

double cooperativity(double g0, double kappa, double gamma) {
    if (!(kappa > 0.0) || !(gamma > 0.0)) throw ConfigError("cooperativity: kappa and gamma must be positive");
    return 4.0 * g0 * g0 / (gamma * kappa);
}

namespace {

// Lowest eigenvalues of a symmetric tridiagonal matrix.
Eigen::VectorXd tridiag_eigs(const Eigen::VectorXd& d, const Eigen::VectorXd& e) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    const double s = std::max(1.0, d.cwiseAbs().maxCoeff());
    Eigen::VectorXd ds = d / s, dummy = e / s;
    es.computeFromTridiagonal(ds, dummy, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("mathieu_characteristic: eigensolver did not converge");
    return es.eigenvalues() * s;
}

// The four symmetry classes of Mathieu functions, truncated to `n` terms.
double mathieu_eval(double q, int order, MathieuType type, int n) {
    Eigen::VectorXd d(n), e(std::max(n - 1, 1));
    e.setConstant(q);
    const bool even_index = order % 2 == 0;
    int rank = 0;
    if (type == MathieuType::A && even_index) {
        // cos(2k x), k >= 0; the k=0 row couples with sqrt(2) q
        for (int k = 0; k < n; ++k) d[k] = 4.0 * k * k;
        if (n > 1) e[0] = std::sqrt(2.0) * q;
        rank = order / 2;
    } else if (type == MathieuType::A) {
        // cos((2k+1) x)
        for (int k = 0; k < n; ++k) d[k] = (2.0 * k + 1) * (2.0 * k + 1);
        d[0] += q;
        rank = order / 2;
    } else if (even_index) {
        // sin(2k x), k >= 1
        for (int k = 0; k < n; ++k) d[k] = 4.0 * (k + 1) * (k + 1);
        rank = order / 2 - 1;
    } else {
        // sin((2k+1) x)
        for (int k = 0; k < n; ++k) d[k] = (2.0 * k + 1) * (2.0 * k + 1);
        d[0] -= q;
        rank = order / 2;
    }
    if (n == 1) return d[0];
    return tridiag_eigs(d, e.head(n - 1))[rank];
}

}  // namespace

double mathieu_characteristic(double q, int order, MathieuType type) {
    if (order < 0) throw ConfigError("mathieu_characteristic: order must be >= 0");
    if (type == MathieuType::B && order == 0) throw ConfigError("mathieu_characteristic: b_0 is undefined");
    int n = std::max(20, order + 2 * static_cast<int>(std::sqrt(std::abs(q))) + 20);
    double prev = mathieu_eval(q, order, type, n);
    for (int iter = 0; iter < 8; ++iter) {
        n *= 2;
        const double cur = mathieu_eval(q, order, type, n);
        if (std::abs(cur - prev) <= 1e-13 * std::max(1.0, std::abs(cur))) return cur;
        prev = cur;
    }
    throw NumericalError("mathieu_characteristic: truncation did not converge");
}

void RadialNoiseSpec::validate() const {
    if (!(trap_freq > 0.0) || !(beam_width > 0.0) || !(depth_v0 > 0.0) || temperature < 0.0)
        throw ConfigError("RadialNoiseSpec: trap_freq, beam_width, depth must be > 0 and temperature >= 0");
}

double thermal_factor_sum(double x, int cutoff, bool classical_partition) {
    // sum over n = n_x + n_y with degeneracy n + 1
    double s = 0.0, z = 0.0;
    for (int n = 0; n <= cutoff; ++n) {
        const double w = (n + 1) * std::exp(-n * x);
        s += w * n * n;
        z += w;
    }
    if (classical_partition) z = 1.0 / (x * x);
    return s / z;
}

namespace {

double edge_difference(double v0) {
    return mathieu_characteristic(v0 / 4.0, 0, MathieuType::A) - mathieu_characteristic(v0 / 4.0, 1, MathieuType::B);
}

double slope_at(double v0, double h) { return (edge_difference(v0 + h) - edge_difference(v0 - h)) / (2.0 * h); }

double j00_for_tunneling(const LatticeSpec& spec, const WannierFunction& w, double j0,
                         const WsOptions& ws, const QuadratureSettings& q) {
    WsOptions o = ws;
    o.method = WsMethod::TightBindingBessel;
    const auto basis = build_ws_basis(spec.bloch_energy_in_recoil(), w, j0, 0, 0, o);
    return coupling_matrix(basis, spec.wavenumber_ratio(), spec.k_l() * spec.cavity_offset, q)(0, 0);
}

}  // namespace

RadialNoiseResult radial_j0_std(const RadialNoiseSpec& noise, const LatticeSpec& spec_in, const WsOptions& ws,
                                const QuadratureSettings& q) {
    noise.validate();
    const LatticeSpec spec = spec_in.with_depth(noise.depth_v0);
    spec.validate();
    RadialNoiseResult r;
    const double er = spec.recoil_energy();
    const double v0_si = noise.depth_v0 * er;
    r.omega_r0 = std::sqrt(4.0 * v0_si / (spec.mass * noise.beam_width * noise.beam_width));

    const double h = 1e-4;
    const double s1 = slope_at(noise.depth_v0, h), s2 = slope_at(noise.depth_v0, h / 2.0);
    r.slope = std::abs(s1);
    r.slope_richardson = std::abs((4.0 * s2 - s1) / 3.0);
    if (std::abs(r.slope - r.slope_richardson) > 1e-5 * std::max(r.slope, 1e-12))
        throw NumericalError("radial_j0_std: finite-difference derivative failed the Richardson check");

    auto bands = compute_band_structure(noise.depth_v0, 3, 64);
    const WannierFunction wf(bands, 0, 0);
    r.j0 = tunneling_rate(bands);
    r.j00 = j00_for_tunneling(spec, wf, r.j0, ws, q);
    if (noise.temperature == 0.0) return r;

    const double x = constants::hbar * noise.trap_freq / (constants::kB * noise.temperature);
    const double em1 = std::expm1(x);
    r.thermal_factor = 2.0 * (std::exp(x) + 2.0) / (em1 * em1);
    // same sum normalized with Z = 1/x^2 instead of 1/(1 - e^{-x})^2
    const double u = -std::expm1(-x);
    r.thermal_factor_classical = r.thermal_factor * (x * x) / (u * u);

    const double amp = constants::hbar * r.omega_r0 * r.omega_r0 / (8.0 * noise.trap_freq) * r.slope / er;
    r.delta_j0 = amp * std::sqrt(r.thermal_factor);
    r.delta_j0_classical = amp * std::sqrt(r.thermal_factor_classical);

    auto spread = [&](double dj) {
        if (dj >= r.j0) throw NumericalError("radial_j0_std: Delta J0 exceeds J0");
        return std::abs(j00_for_tunneling(spec, wf, r.j0 + dj, ws, q) - j00_for_tunneling(spec, wf, r.j0 - dj, ws, q)) / 2.0;
    };
    r.delta_j00 = spread(r.delta_j0);
    r.delta_j00_classical = spread(r.delta_j0_classical);
    r.relative_delta_j00 = r.delta_j00 / std::abs(r.j00);
    return r;
}

void LoadingSpec::validate() const {
    if (!(epsilon > 0.0) || epsilon > 1.0) throw ConfigError("LoadingSpec: epsilon must lie in (0, 1]");
    if (!(lattice_length > 0.0)) throw ConfigError("LoadingSpec: lattice_length must be positive");
    if (subsample && *subsample < 1) throw ConfigError("LoadingSpec: subsample must be >= 1");
}

LoadingResult loading_error_std(const LoadingSpec& load, const LatticeSpec& spec, const LatticeOptions& opt) {
    load.validate();
    spec.validate();
    LoadingResult res;
    res.candidate_sites = static_cast<int>(std::floor(load.lattice_length / spec.lattice_spacing()));
    if (res.candidate_sites < 100) throw ConfigError("loading_error_std: lattice must hold at least 100 sites");

    const double r = spec.wavenumber_ratio();
    const double x0 = spec.k_l() * spec.cavity_offset;
    for (long n = 0; n < res.candidate_sites; ++n) {
        const double s = std::sin(r * (n * constants::pi + x0));
        if (s * s < load.epsilon) res.loaded_sites.push_back(n);
    }
    if (res.loaded_sites.empty()) throw ConfigError("loading_error_std: no site satisfies the loading threshold");
    if (load.subsample && *load.subsample < static_cast<int>(res.loaded_sites.size())) {
        std::mt19937_64 rng(load.rng_seed);
        std::shuffle(res.loaded_sites.begin(), res.loaded_sites.end(), rng);
        res.loaded_sites.resize(*load.subsample);
        std::sort(res.loaded_sites.begin(), res.loaded_sites.end());
    }

    const auto bands = compute_band_structure(spec.depth_v0, opt.n_bands, opt.n_q);
    const WannierFunction wf(bands, 0, 0);
    const auto basis = build_ws_basis(spec.bloch_energy_in_recoil(), wf, tunneling_rate(bands), 0, 0, opt.ws);
    const auto pr = phase_response(basis, r, opt.quad);
    for (long n : res.loaded_sites) res.j00.push_back(pr.at(n * constants::pi + x0)(0, 0));

    const double m = std::accumulate(res.j00.begin(), res.j00.end(), 0.0) / res.j00.size();
    double var = 0.0;
    for (double v : res.j00) var += (v - m) * (v - m);
    res.mean = m;
    res.std_dev = std::sqrt(var / res.j00.size());
    return res;
}

}  // namespace wscav
