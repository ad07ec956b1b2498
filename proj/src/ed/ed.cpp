#include "wscav/ed.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "wscav/error.hpp"

namespace wscav {

using cd = std::complex<double>;

double fock_dimension(int n_atoms, int n_modes, std::optional<int> photon_cutoff) {
    double c = 1.0;
    for (int i = 1; i < n_modes; ++i) c = c * (n_atoms + i) / i;
    return c * (photon_cutoff ? *photon_cutoff + 1 : 1);
}

namespace {

void enumerate(int remaining, int mode, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
    const int n_modes = static_cast<int>(cur.size());
    if (mode == n_modes - 1) {
        cur[mode] = remaining;
        out.push_back(cur);
        return;
    }
    for (int k = 0; k <= remaining; ++k) {
        cur[mode] = k;
        enumerate(remaining - k, mode + 1, cur, out);
    }
}

void check_modes(const FockBasis& b, const CouplingMatrix& j) {
    if (b.first_site < j.n_min || b.first_site + b.n_modes - 1 > j.n_max)
        throw ConfigError("ED: coupling matrix does not cover the basis modes");
}

Eigen::MatrixXd mode_block(const FockBasis& b, const CouplingMatrix& j) {
    check_modes(b, j);
    return j.entries.block(b.first_site - j.n_min, b.first_site - j.n_min, b.n_modes, b.n_modes);
}

Eigen::VectorXd ladder_diagonal(const FockBasis& b) {
    Eigen::VectorXd d(b.atom_dim());
    for (int s = 0; s < b.atom_dim(); ++s) {
        double e = 0.0;
        for (int m = 0; m < b.n_modes; ++m) e += (b.first_site + m) * b.states[s][m];
        d[s] = e;
    }
    return d;
}

}  // namespace

int FockBasis::atom_index(const std::vector<int>& occupation) const {
    auto it = lookup_.find(occupation);
    if (it == lookup_.end()) throw ConfigError("FockBasis: occupation not in the basis");
    return it->second;
}

int FockBasis::index(const std::vector<int>& occupation, int photons) const {
    if (photons < 0 || photons >= photon_dim()) throw ConfigError("FockBasis: photon number out of range");
    return atom_index(occupation) * photon_dim() + photons;
}

FockBasis build_fock_basis(int n_atoms, int n_modes, std::optional<int> photon_cutoff, int first_site) {
    if (n_atoms < 0 || n_modes < 1) throw ConfigError("build_fock_basis: need n_atoms >= 0, n_modes >= 1");
    if (photon_cutoff && *photon_cutoff < 0) throw ConfigError("build_fock_basis: negative photon cutoff");
    const double est = fock_dimension(n_atoms, n_modes, photon_cutoff);
    if (est > 1e5) {
        std::ostringstream os;
        os << "build_fock_basis: dimension " << est << " exceeds the dense budget of 1e5";
        throw ConfigError(os.str());
    }
    FockBasis b;
    b.n_atoms = n_atoms;
    b.n_modes = n_modes;
    b.first_site = first_site;
    b.photon_cutoff = photon_cutoff;
    std::vector<int> cur(n_modes, 0);
    enumerate(n_atoms, 0, cur, b.states);
    for (int i = 0; i < b.atom_dim(); ++i) b.lookup_[b.states[i]] = i;
    return b;
}

Eigen::MatrixXd one_body_operator(const FockBasis& b, const Eigen::MatrixXd& a) {
    const int d = b.atom_dim();
    Eigen::MatrixXd op = Eigen::MatrixXd::Zero(d, d);
    for (int s = 0; s < d; ++s) {
        const auto& occ = b.states[s];
        for (int n = 0; n < b.n_modes; ++n) {
            if (occ[n] == 0) continue;
            for (int m = 0; m < b.n_modes; ++m) {
                if (a(m, n) == 0.0) continue;
                auto tgt = occ;
                double amp = std::sqrt(static_cast<double>(tgt[n]));
                tgt[n] -= 1;
                amp *= std::sqrt(static_cast<double>(tgt[m] + 1));
                tgt[m] += 1;
                op(b.atom_index(tgt), s) += a(m, n) * amp;
            }
        }
    }
    return op;
}

EdHamiltonian build_atom_cavity_h(const FockBasis& b, const CouplingMatrix& j, const CavityDrive& drive) {
    if (!b.photon_cutoff) throw ConfigError("build_atom_cavity_h: the basis needs a photon cutoff");
    const Eigen::MatrixXd neff = one_body_operator(b, mode_block(b, j));
    const Eigen::VectorXd ladder = ladder_diagonal(b);
    const int na = b.atom_dim(), np = b.photon_dim();
    EdHamiltonian h;
    h.model = EdModel::AtomCavity;
    h.h = Eigen::MatrixXcd::Zero(b.dim(), b.dim());
    for (int s = 0; s < na; ++s)
        for (int p = 0; p < np; ++p) {
            const int i = s * np + p;
            h.h(i, i) += ladder[s] - drive.detuning_c * p;
            if (p + 1 < np) {
                const double amp = std::sqrt(static_cast<double>(p + 1));
                h.h(i + 1, i) += drive.pump * amp;             // eta a^dagger
                h.h(i, i + 1) += std::conj(drive.pump) * amp;  // eta^* a
            }
            for (int t = 0; t < na; ++t)
                if (neff(t, s) != 0.0) h.h(t * np + p, i) += drive.coupling_sq_over_det * p * neff(t, s);
        }
    return h;
}

Eigen::MatrixXd cavity_operator(const FockBasis& b, const CouplingMatrix& j, double v, double beta,
                                double n_atoms) {
    if (!(beta > 0.0)) throw ConfigError("cavity_operator: beta must be > 0");
    const Eigen::MatrixXd neff = one_body_operator(b, mode_block(b, j));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(neff);
    Eigen::VectorXd f(es.eigenvalues().size());
    for (Eigen::Index k = 0; k < f.size(); ++k) {
        const double den = 1.0 + beta * es.eigenvalues()[k] / n_atoms;
        if (den <= 0.0) throw NumericalError("cavity_operator: 1 + beta N_eff/N <= 0 (cavity resonance crossed)");
        f[k] = -(v * n_atoms / beta) / den;
    }
    return es.eigenvectors() * f.asDiagonal() * es.eigenvectors().transpose();
}

EdHamiltonian build_atom_only_h(const FockBasis& b, const CouplingMatrix& j, double v, double beta,
                                double n_atoms) {
    if (b.photon_cutoff) throw ConfigError("build_atom_only_h: expects a photonless basis");
    if (beta < 0.0) throw ConfigError("build_atom_only_h: beta must be >= 0");
    if (!(n_atoms > 0.0)) throw ConfigError("build_atom_only_h: atom number must be positive");
    const Eigen::MatrixXd neff = one_body_operator(b, mode_block(b, j));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(neff);
    if (es.info() != Eigen::Success) throw NumericalError("build_atom_only_h: eigensolver failed");
    // -(VN/beta)/(1 + beta x/N) = -VN/beta + V x / (1 + beta x/N)
    Eigen::VectorXd f(es.eigenvalues().size());
    for (Eigen::Index k = 0; k < f.size(); ++k) {
        const double x = es.eigenvalues()[k];
        const double den = 1.0 + beta * x / n_atoms;
        if (den <= 0.0) throw NumericalError("build_atom_only_h: 1 + beta N_eff/N <= 0 (cavity resonance crossed)");
        f[k] = v * x / den;
    }
    EdHamiltonian h;
    h.model = EdModel::AtomOnly;
    h.energy_offset = beta > 0.0 ? -v * n_atoms / beta : 0.0;
    Eigen::MatrixXd real = es.eigenvectors() * f.asDiagonal() * es.eigenvectors().transpose();
    real.diagonal() += ladder_diagonal(b);
    h.h = real.cast<cd>();
    return h;
}

Eigen::VectorXcd fock_state(const FockBasis& b, const std::vector<int>& occupation, int photons) {
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(b.dim());
    psi[b.index(occupation, photons)] = 1.0;
    return psi;
}

Eigen::VectorXcd dressed_state(const FockBasis& b, const CouplingMatrix& j, const CavityDrive& drive,
                               const std::vector<int>& occupation) {
    if (!b.photon_cutoff) throw ConfigError("dressed_state: the basis needs a photon cutoff");
    const Eigen::MatrixXd neff = one_body_operator(b, mode_block(b, j));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(neff);
    Eigen::VectorXd atoms = Eigen::VectorXd::Zero(b.atom_dim());
    atoms[b.atom_index(occupation)] = 1.0;
    const Eigen::VectorXd proj = es.eigenvectors().transpose() * atoms;
    const int np = b.photon_dim();
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(b.dim());
    for (Eigen::Index k = 0; k < proj.size(); ++k) {
        if (std::abs(proj[k]) < 1e-15) continue;
        const cd alpha = drive.pump / (drive.detuning_c - drive.coupling_sq_over_det * es.eigenvalues()[k]);
        Eigen::VectorXcd coh(np);
        cd term = std::exp(-std::norm(alpha) / 2.0);
        for (int p = 0; p < np; ++p) {
            coh[p] = term;
            term *= alpha / std::sqrt(static_cast<double>(p + 1));
        }
        for (int s = 0; s < b.atom_dim(); ++s) {
            const double w = es.eigenvectors()(s, k) * proj[k];
            if (w == 0.0) continue;
            psi.segment(s * np, np) += w * coh;
        }
    }
    return psi / psi.norm();
}

EdTrajectory evolve_ed(const FockBasis& b, const EdHamiltonian& h, const Eigen::VectorXcd& psi0,
                       double horizon, double dt) {
    if (psi0.size() != b.dim() || h.h.rows() != b.dim()) throw ConfigError("evolve_ed: dimension mismatch");
    if (!(horizon > 0.0) || !(dt > 0.0)) throw ConfigError("evolve_ed: bad horizon or step");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h.h);
    if (es.info() != Eigen::Success) throw NumericalError("evolve_ed: eigensolver failed");
    const Eigen::VectorXcd coef = es.eigenvectors().adjoint() * psi0;
    const int np = b.photon_dim();
    const double norm0 = psi0.squaredNorm();

    EdTrajectory tr;
    const auto k = static_cast<std::size_t>(std::llround(horizon / dt));
    for (std::size_t i = 0; i <= k; ++i) {
        const double t = i * dt;
        Eigen::VectorXcd c(coef.size());
        for (Eigen::Index q = 0; q < coef.size(); ++q)
            c[q] = coef[q] * std::polar(1.0, -es.eigenvalues()[q] * kTwoPi * t);
        const Eigen::VectorXcd psi = es.eigenvectors() * c;
        Eigen::VectorXd pops = Eigen::VectorXd::Zero(b.n_modes);
        double photons = 0.0, atoms = 0.0, top = 0.0;
        for (int s = 0; s < b.atom_dim(); ++s)
            for (int p = 0; p < np; ++p) {
                const double w = std::norm(psi[s * np + p]);
                for (int m = 0; m < b.n_modes; ++m) pops[m] += w * b.states[s][m];
                photons += w * p;
                atoms += w * b.n_atoms;
                if (p == np - 1 && b.photon_cutoff) top += w;
            }
        tr.times.push_back(t);
        tr.populations.push_back(pops);
        tr.photon_number.push_back(photons);
        tr.max_norm_drift = std::max(tr.max_norm_drift, std::abs(psi.squaredNorm() - norm0));
        tr.max_atom_number_drift = std::max(tr.max_atom_number_drift, std::abs(pops.sum() - b.n_atoms * norm0));
        tr.top_photon_population = std::max(tr.top_photon_population, top);
        (void)atoms;
    }
    if (tr.top_photon_population > 1e-6) {
        std::ostringstream os;
        os << "photon cutoff saturated: population at the top level reached " << tr.top_photon_population;
        tr.warnings.push_back(os.str());
    }
    return tr;
}

}  // namespace wscav
