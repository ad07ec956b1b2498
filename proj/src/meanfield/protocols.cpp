#include <cmath>
#include <sstream>

#include "wscav/error.hpp"
#include "wscav/meanfield.hpp"

namespace wscav {

using cd = std::complex<double>;

QuenchResult prepare_quench_state(const LatticeSpec& spec, double deep_depth, double shallow_depth,
                                  int site, int n_min, int n_max, const LatticeOptions& opt) {
    if (deep_depth < shallow_depth)
        throw ConfigError("prepare_quench_state: deep depth must not be below the shallow depth");
    if (site < n_min || site > n_max) throw ConfigError("prepare_quench_state: site outside range");

    const auto shallow = build_lattice_model(spec.with_depth(shallow_depth), n_min, n_max, opt);
    const auto deep_bands = compute_band_structure(spec.with_depth(deep_depth), 1, opt.n_q);
    const WannierFunction w_deep(deep_bands, 0, site);
    const auto& basis = shallow.basis;
    const int ns = basis.size();

    // <phi_n^shallow | w^deep_site> by adaptive quadrature over the whole support
    const int margin = std::max(opt.quad.margin_sites, basis.a_max - basis.n_max + 3);
    std::vector<double> breaks;
    for (int c = n_min - margin; c <= n_max + margin + 1; ++c) breaks.push_back((c - 0.5) * constants::pi);
    auto integrand = [&](double x, Eigen::Ref<Eigen::VectorXd> out) {
        thread_local Eigen::VectorXcd z;
        basis.evaluate(x, out, z);
        out *= w_deep(x);
    };
    numerics::QuadOptions qo;
    qo.abs_tol = opt.quad.abs_tol;
    const auto res = numerics::integrate_gk15(integrand, ns, breaks, qo);

    QuenchResult r;
    r.overlaps = res.value;
    r.ground_band_fraction = res.value.squaredNorm();
    if (r.ground_band_fraction <= 0.0) throw NumericalError("prepare_quench_state: vanishing overlap");
    r.state.n_min = n_min;
    r.state.amplitudes = (res.value / std::sqrt(r.ground_band_fraction)).cast<cd>();
    if (r.ground_band_fraction < 0.9) {
        std::ostringstream os;
        os << "ground-band fraction " << r.ground_band_fraction
           << " is below 0.9; higher bands carry a sizable weight";
        r.warnings.push_back(os.str());
    }
    return r;
}

ModulationResult prepare_modulated_state(const LatticeModel& model, double v1, double omega,
                                         double phase, double duration) {
    const auto& basis = model.basis;
    if (basis.n_min > 0 || basis.n_max < 0)
        throw ConfigError("prepare_modulated_state: the basis must contain site 0");
    if (duration < 0.0) throw ConfigError("prepare_modulated_state: negative duration");
    const int m = static_cast<int>(std::lround(omega));
    if (m < 1) throw ConfigError("prepare_modulated_state: drive frequency must be near a sideband m >= 1");
    if (std::abs(m) > basis.n_max - basis.n_min)
        throw ConfigError("prepare_modulated_state: sideband couples states outside the range");

    ModulationResult r;
    r.sideband = m;
    r.detuning = omega - m;
    // t_ab = V1 int sin^2(x) phi_a phi_b, converted to omega_B
    r.t_matrix = coupling_matrix(basis, 1.0, 0.0).entries * (v1 / basis.bloch_energy);
    const int ns = basis.size();
    const int i0 = -basis.n_min;
    r.coupling = (i0 + m < ns) ? r.t_matrix(i0 + m, i0) : r.t_matrix(i0 - m, i0);
    if (std::abs(r.detuning) > std::abs(r.coupling)) {
        std::ostringstream os;
        os << "drive detuning " << r.detuning << " omega_B exceeds the sideband coupling " << r.coupling;
        r.warnings.push_back(os.str());
    }

    auto init = MeanFieldState::localized(basis.n_min, basis.n_max, 0);
    r.state = init;
    r.state.time = duration;
    if (duration == 0.0) return r;

    // interaction picture, rotating-wave sideband Hamiltonian
    const double delta = r.detuning;
    const Eigen::MatrixXd t = r.t_matrix;
    auto rhs = [&](double tt, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        const cd down = 0.5 * std::polar(1.0, -(delta * tt + phase));  // |a><b| with a - b = m
        dy.setZero(2 * ns);
        for (int a = 0; a < ns; ++a) {
            cd acc = 0.0;
            if (a - m >= 0) acc += down * t(a, a - m) * cd(y[a - m], y[ns + a - m]);
            if (a + m < ns) acc += std::conj(down) * t(a, a + m) * cd(y[a + m], y[ns + a + m]);
            const cd d = cd(0, -1) * acc;
            dy[a] = d.real();
            dy[ns + a] = d.imag();
        }
    };
    Eigen::VectorXd y = Eigen::VectorXd::Zero(2 * ns);
    y[i0] = 1.0;
    const double tau = kTwoPi * duration;
    const double ts[1] = {tau};
    numerics::integrate_dp45(rhs, y, 0.0, ts, [](std::size_t, double, const Eigen::VectorXd&) {});
    for (int a = 0; a < ns; ++a)
        r.state.amplitudes[a] = cd(y[a], y[ns + a]) * std::polar(1.0, -(basis.n_min + a) * tau);
    return r;
}

}  // namespace wscav
