#include "wscav/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wscav/error.hpp"

namespace wscav {

using cd = std::complex<double>;
constexpr cd I(0.0, 1.0);

double CavityDrive::v() const {
    if (detuning_c == 0.0) throw ConfigError("cavity drive: Delta_c must be nonzero");
    return coupling_sq_over_det * std::norm(pump) / (detuning_c * detuning_c);
}

double CavityDrive::beta(double n_atoms) const {
    if (detuning_c == 0.0) throw ConfigError("cavity drive: Delta_c must be nonzero");
    return -n_atoms * coupling_sq_over_det / detuning_c;
}

CavityDrive CavityDrive::scaled(double unit) const {
    return {detuning_c / unit, linewidth / unit, pump / unit, coupling_sq_over_det / unit};
}

MeanFieldState MeanFieldState::localized(int n_min, int n_max, int site) {
    if (site < n_min || site > n_max) throw ConfigError("localized state: site outside the range");
    MeanFieldState s;
    s.n_min = n_min;
    s.amplitudes = Eigen::VectorXcd::Zero(n_max - n_min + 1);
    s.amplitudes[site - n_min] = 1.0;
    return s;
}

std::vector<double> Trajectory::rho(int n) const {
    std::vector<double> out;
    out.reserve(populations.size());
    for (const auto& p : populations) out.push_back(p[n - n_min]);
    return out;
}

double n_eff(const Eigen::VectorXcd& c, const Eigen::MatrixXd& j) {
    if (c.size() != j.rows()) throw ConfigError("n_eff: amplitude and coupling ranges differ");
    return (c.adjoint() * (j.cast<cd>() * c))(0, 0).real();
}

double n_eff(const MeanFieldState& state, const CouplingMatrix& j) {
    if (state.n_min != j.n_min || state.n_max() != j.n_max)
        throw ConfigError("n_eff: state and coupling matrix cover different site ranges");
    return n_eff(state.amplitudes, j.entries);
}

double meanfield_energy(const Eigen::VectorXcd& c, const Eigen::MatrixXd& j, int n_min, double v,
                        double beta) {
    double e = 0.0;
    for (Eigen::Index i = 0; i < c.size(); ++i) e += (n_min + i) * std::norm(c[i]);
    const double ne = n_eff(c, j);
    return e + v * ne / (1.0 + beta * ne);
}

namespace {

std::vector<double> sample_grid(double horizon, double dt) {
    if (!(horizon > 0.0)) throw ConfigError("horizon must be positive");
    if (!(dt > 0.0)) throw ConfigError("sample spacing must be positive");
    const auto k = static_cast<std::size_t>(std::llround(horizon / dt));
    std::vector<double> t(k + 1);
    for (std::size_t i = 0; i <= k; ++i) t[i] = i * dt;
    t.back() = std::max(t.back(), horizon);
    return t;
}

void unpack(const Eigen::VectorXd& y, Eigen::Index n, Eigen::VectorXcd& c) {
    c.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) c[i] = cd(y[i], y[n + i]);
}

}  // namespace

Trajectory evolve_atom_only(const MeanFieldState& state, const CouplingMatrix& j, double v,
                            double beta, double horizon, const Sampling& s) {
    if (beta < 0.0) throw ConfigError("evolve_atom_only: beta must be >= 0");
    if (state.n_min != j.n_min || state.n_max() != j.n_max)
        throw ConfigError("evolve_atom_only: state and coupling ranges differ");
    const Eigen::Index n = state.amplitudes.size();
    const Eigen::MatrixXd jm = j.entries;
    Eigen::VectorXd ladder(n);
    for (Eigen::Index i = 0; i < n; ++i) ladder[i] = static_cast<double>(state.n_min + i);

    auto rhs = [&](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        const auto re = y.head(n), im = y.tail(n);
        const Eigen::VectorXd jr = jm * re, ji = jm * im;
        const double ne = re.dot(jr) + im.dot(ji);
        const double den = 1.0 + beta * ne;
        if (den <= 0.0) throw NumericalError("evolve_atom_only: 1 + beta*n_eff crossed zero");
        const double vt = v / (den * den);
        // dc/dt = -i (ladder c + vt J c)
        dy.resize(2 * n);
        dy.head(n) = ladder.cwiseProduct(im) + vt * ji;
        dy.tail(n) = -(ladder.cwiseProduct(re) + vt * jr);
    };

    Trajectory tr;
    tr.n_min = state.n_min;
    tr.times = sample_grid(horizon, s.dt);
    const std::size_t ns = tr.times.size();
    tr.populations.resize(ns);
    tr.signal.resize(ns);
    std::vector<double> phys(ns);
    for (std::size_t i = 0; i < ns; ++i) phys[i] = kTwoPi * tr.times[i];

    Eigen::VectorXd y(2 * n);
    y << state.amplitudes.real(), state.amplitudes.imag();
    const double norm0 = state.norm();
    const double e0 = meanfield_energy(state.amplitudes, jm, state.n_min, v, beta);
    const double escale = std::max(std::abs(e0), 1.0);
    Eigen::VectorXcd c;
    auto observe = [&](std::size_t k, double, const Eigen::VectorXd& yy) {
        unpack(yy, n, c);
        tr.populations[k] = c.cwiseAbs2();
        tr.signal[k] = n_eff(c, jm);
        tr.stats.max_norm_drift = std::max(tr.stats.max_norm_drift, std::abs(c.squaredNorm() - norm0));
        const double e = meanfield_energy(c, jm, state.n_min, v, beta);
        tr.stats.max_energy_drift = std::max(tr.stats.max_energy_drift, std::abs(e - e0) / escale);
    };
    const auto st = numerics::integrate_dp45(rhs, y, 0.0, phys, observe, s.ode);
    tr.stats.steps = st.accepted;
    tr.stats.rejected = st.rejected;
    tr.stats.rhs_evals = st.rhs_evals;
    tr.final_state.n_min = state.n_min;
    unpack(y, n, tr.final_state.amplitudes);
    tr.final_state.time = state.time + tr.times.back();
    return tr;
}

double adiabatic_photon_number(const CavityDrive& d, double n_atoms, double ne) {
    const double det = d.detuning_c - d.coupling_sq_over_det * n_atoms * ne;
    return std::norm(d.pump) / (det * det + d.linewidth * d.linewidth / 4.0);
}

Trajectory evolve_atom_cavity(const MeanFieldState& state, const CouplingMatrix& j,
                              const CavityDrive& d, double n_atoms, double horizon,
                              const AtomCavityOptions& opt) {
    if (state.n_min != j.n_min || state.n_max() != j.n_max)
        throw ConfigError("evolve_atom_cavity: state and coupling ranges differ");
    if (!(n_atoms > 0.0)) throw ConfigError("evolve_atom_cavity: atom number must be positive");
    if (d.linewidth < 0.0) throw ConfigError("evolve_atom_cavity: kappa must be >= 0");
    const Eigen::Index n = state.amplitudes.size();
    const Eigen::MatrixXd jm = j.entries;
    Eigen::VectorXd ladder(n);
    for (Eigen::Index i = 0; i < n; ++i) ladder[i] = static_cast<double>(state.n_min + i);
    const double u = d.coupling_sq_over_det;

    auto rhs = [&](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        const auto re = y.head(n), im = y.segment(n, n);
        const cd alpha(y[2 * n], y[2 * n + 1]);
        const Eigen::VectorXd jr = jm * re, ji = jm * im;
        const double ne = re.dot(jr) + im.dot(ji);
        const double shift = u * std::norm(alpha);
        dy.resize(2 * n + 2);
        dy.head(n) = ladder.cwiseProduct(im) + shift * ji;
        dy.segment(n, n) = -(ladder.cwiseProduct(re) + shift * jr);
        // i alpha' = -(Delta_c + i kappa/2 - U N n_eff) alpha + eta
        const cd da = I * (d.detuning_c + I * d.linewidth / 2.0 - u * n_atoms * ne) * alpha - I * d.pump;
        dy[2 * n] = da.real();
        dy[2 * n + 1] = da.imag();
    };

    cd alpha0 = state.cavity_alpha.value_or(cd(0.0, 0.0));
    if (opt.adiabatic_initial_field && !state.cavity_alpha) {
        const double ne = n_eff(state.amplitudes, jm);
        alpha0 = d.pump / (d.detuning_c + I * d.linewidth / 2.0 - u * n_atoms * ne);
    }

    Trajectory tr;
    tr.n_min = state.n_min;
    tr.times = sample_grid(horizon, opt.sampling.dt);
    const std::size_t ns = tr.times.size();
    tr.populations.resize(ns);
    tr.signal.resize(ns);
    tr.photon_number.resize(ns);
    std::vector<double> phys(ns);
    for (std::size_t i = 0; i < ns; ++i) phys[i] = kTwoPi * tr.times[i];

    Eigen::VectorXd y(2 * n + 2);
    y << state.amplitudes.real(), state.amplitudes.imag(), alpha0.real(), alpha0.imag();
    const double norm0 = state.norm();
    Eigen::VectorXcd c;
    auto observe = [&](std::size_t k, double, const Eigen::VectorXd& yy) {
        unpack(yy, n, c);
        tr.populations[k] = c.cwiseAbs2();
        tr.signal[k] = n_eff(c, jm);
        tr.photon_number[k] = yy[2 * n] * yy[2 * n] + yy[2 * n + 1] * yy[2 * n + 1];
        tr.stats.max_norm_drift = std::max(tr.stats.max_norm_drift, std::abs(c.squaredNorm() - norm0));
    };
    const auto st = numerics::integrate_dp45(rhs, y, 0.0, phys, observe, opt.sampling.ode);
    tr.stats.steps = st.accepted;
    tr.stats.rejected = st.rejected;
    tr.stats.rhs_evals = st.rhs_evals;
    tr.final_state.n_min = state.n_min;
    unpack(y, n, tr.final_state.amplitudes);
    tr.final_state.cavity_alpha = cd(y[2 * n], y[2 * n + 1]);
    tr.final_state.time = state.time + tr.times.back();
    return tr;
}

double a_dip(const Trajectory& traj, double window) {
    if (traj.times.empty() || traj.times.back() < window - 1e-9) {
        std::ostringstream os;
        os << "a_dip: trajectory covers " << (traj.times.empty() ? 0.0 : traj.times.back())
           << " T_B, need " << window;
        throw ConfigError(os.str());
    }
    if (0 < traj.n_min || traj.populations.empty() || 0 >= traj.n_min + traj.populations[0].size())
        throw ConfigError("a_dip: site 0 is outside the trajectory range");
    double lo = 1.0;
    for (std::size_t i = 0; i < traj.times.size() && traj.times[i] <= window + 1e-12; ++i)
        lo = std::min(lo, traj.populations[i][-traj.n_min]);
    return std::clamp(1.0 - lo, 0.0, 1.0);
}

SpectrumPeak dominant_frequency(const std::vector<double>& t, const std::vector<double>& x) {
    SpectrumPeak pk;
    const std::size_t n = x.size();
    if (n < 8 || t.size() != n) throw ConfigError("dominant_frequency: need >= 8 aligned samples");
    const double dt = t[1] - t[0];
    const double duration = t.back() - t.front();
    pk.resolution = 1.0 / duration;
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    std::vector<double> xw(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = 0.5 - 0.5 * std::cos(kTwoPi * i / (n - 1));
        xw[i] = (x[i] - mean) * w;
        var += (x[i] - mean) * (x[i] - mean);
    }
    if (var / n < 1e-24) return pk;  // flat signal, no peak

    auto power = [&](double f) {
        const cd step = std::polar(1.0, -kTwoPi * f * dt);
        cd ph = 1.0, acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            acc += xw[i] * ph;
            ph *= step;
        }
        return std::norm(acc);
    };
    const double fmin = 1.5 / duration, fmax = 0.5 / dt;
    const double df = 1.0 / (8.0 * duration);
    double best_f = fmin, best_p = -1.0;
    for (double f = fmin; f <= fmax; f += df) {
        const double p = power(f);
        if (p > best_p) {
            best_p = p;
            best_f = f;
        }
    }
    auto [fm, negp] = numerics::minimize_brent([&](double f) { return -power(f); },
                                               std::max(fmin, best_f - df), std::min(fmax, best_f + df));
    pk.found = true;
    pk.frequency = -negp >= best_p ? fm : best_f;
    pk.power = std::max(-negp, best_p);
    return pk;
}

SpectrumPeak bo_spectrum(const Trajectory& traj) {
    if (traj.times.size() < 2 || traj.times.back() - traj.times.front() < 10.0 - 1e-9)
        throw ConfigError("bo_spectrum: need at least 10 Bloch periods of samples");
    return dominant_frequency(traj.times, traj.signal);
}

}  // namespace wscav
