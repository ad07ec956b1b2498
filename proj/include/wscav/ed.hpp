#pragma once

#include <Eigen/Dense>
#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wscav/lattice.hpp"
#include "wscav/meanfield.hpp"

namespace wscav {

struct FockBasis {
    int n_atoms = 0;
    int n_modes = 0;
    int first_site = 0;  // WS index of mode 0
    std::optional<int> photon_cutoff;
    std::vector<std::vector<int>> states;  // atom occupations, lexicographic order

    int atom_dim() const { return static_cast<int>(states.size()); }
    int photon_dim() const { return photon_cutoff ? *photon_cutoff + 1 : 1; }
    int dim() const { return atom_dim() * photon_dim(); }
    /// Full index of (atom occupation, photon number); photons vary fastest.
    int index(const std::vector<int>& occupation, int photons = 0) const;
    int atom_index(const std::vector<int>& occupation) const;

private:
    std::map<std::vector<int>, int> lookup_;
    friend FockBasis build_fock_basis(int, int, std::optional<int>, int);
};

FockBasis build_fock_basis(int n_atoms, int n_modes, std::optional<int> photon_cutoff = std::nullopt,
                           int first_site = 0);

/// C(n + k - 1, k - 1) computed exactly; used for the size estimate.
double fock_dimension(int n_atoms, int n_modes, std::optional<int> photon_cutoff);

enum class EdModel { AtomCavity, AtomOnly };

struct EdHamiltonian {
    EdModel model = EdModel::AtomOnly;
    Eigen::MatrixXcd h;
    double energy_offset = 0.0;  // constant dropped from h (atom-only: -V N / beta)
    std::vector<std::string> warnings;
};

/// Many-body matrix of sum_{m,n} a_{mn} c_m^dagger c_n on the atom sector.
Eigen::MatrixXd one_body_operator(const FockBasis& basis, const Eigen::MatrixXd& a);

/// Couplings are taken from `j` for the modes first_site .. first_site+n_modes-1.
/// `drive` is in omega_B units.
EdHamiltonian build_atom_cavity_h(const FockBasis& basis, const CouplingMatrix& j,
                                  const CavityDrive& drive);

EdHamiltonian build_atom_only_h(const FockBasis& basis, const CouplingMatrix& j, double v,
                                double beta, double n_atoms);

/// Atom-only cavity part V f(N_eff) with the offset included, for identity checks.
Eigen::MatrixXd cavity_operator(const FockBasis& basis, const CouplingMatrix& j, double v,
                                double beta, double n_atoms);

Eigen::VectorXcd fock_state(const FockBasis& basis, const std::vector<int>& occupation, int photons = 0);

/// Atoms in `occupation` dressed by the adiabatic cavity field: each N_eff
/// eigencomponent nu carries a coherent photon state with alpha = eta / (Delta_c - U nu).
Eigen::VectorXcd dressed_state(const FockBasis& basis, const CouplingMatrix& j,
                               const CavityDrive& drive, const std::vector<int>& occupation);

struct EdTrajectory {
    std::vector<double> times;                 // T_B
    std::vector<Eigen::VectorXd> populations;  // <c_m^dagger c_m> per mode (atoms)
    std::vector<double> photon_number;
    double max_norm_drift = 0.0;
    double max_atom_number_drift = 0.0;
    double top_photon_population = 0.0;  // largest weight seen at the cutoff level
    std::vector<std::string> warnings;
};

EdTrajectory evolve_ed(const FockBasis& basis, const EdHamiltonian& h, const Eigen::VectorXcd& psi0,
                       double horizon, double dt = 1.0 / 64.0);

}  // namespace wscav
