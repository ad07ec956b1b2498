#pragma once

#include <Eigen/Dense>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "wscav/lattice.hpp"
#include "wscav/meanfield.hpp"

namespace wscav {

// Undepleted-pump expansion around all atoms in phi_0, keeping phi_{+1} and
// phi_{-1} as quantum side modes. Rates are in omega_B.

struct UpaCoefficients {
    double v = 0.0, beta = 0.0, n_atoms = 0.0;
    double j00 = 0.0;
    double v1 = 0.0;     // 2V / (1 + beta J00)^2
    double v2 = 0.0;     // -(V beta / N) / (1 + beta J00)^3
    double delta = 0.0;  // (Delta_1 + Delta_-1) / 2
    double omega = 0.0;  // (Omega_1 - Omega_-1) / 2, Omega_1 = J_{0,1}, Omega_-1 = J_{-1,0}
    double alpha_plus = 0.0, alpha_minus = 0.0;  // coherent displacements of c_{+1}, c_{-1}
    double linear = 0.0;                         // L in L (X_1 - X_-1), X = c + c^dagger
    // validity metrics for the symmetric approximation
    double omega_asymmetry = 0.0;  // |Omega_1 + Omega_-1| / |Omega_1|
    double delta_asymmetry = 0.0;  // |Delta_1 - Delta_-1| / |Delta_1|

    double pair_coupling() const { return v2 * n_atoms * omega * omega; }  // g
};

UpaCoefficients upa_coefficients(const CouplingMatrix& j, double v, double beta, double n_atoms);

/// Dynamical matrix acting on (c_1, c_-1, c_1^dagger, c_-1^dagger): i dC/dt = M C.
Eigen::Matrix4d bdg_matrix(const UpaCoefficients& c, double omega_b = 1.0);

struct BdGSpectrum {
    Eigen::Vector4cd eigenvalues;
    bool amplifying = false;
    double growth_rate = 0.0;  // max Im(lambda)
};

BdGSpectrum classify_stability(const Eigen::Matrix4d& m, double threshold = 1e-9);

struct UpaEvolution {
    std::vector<double> times;  // T_B
    std::vector<double> rho_plus, rho_minus;   // physical populations of phi_{+1}, phi_{-1} (atoms)
    std::vector<double> n_eff;                 // N_eff/N to second order in the side modes
    double breakdown_time = std::numeric_limits<double>::infinity();  // first rho/N > 0.1
    double max_symplectic_error = 0.0;
};

/// Propagates the quadratic model with all atoms initially in phi_0 (the displaced
/// side modes start at -alpha) plus vacuum fluctuations.
UpaEvolution evolve_upa(const UpaCoefficients& c, double horizon, double dt = 1.0 / 64.0);

/// Least-squares slope of log(rho_+ + rho_-) over the given window (T_B), returned per unit omega_B time.
double fitted_growth_rate(const UpaEvolution& e, double t_from, double t_to);

struct AmplificationCell {
    double depth = 0.0, beta = 0.0;
    bool amplifying = false;
    double growth_rate = 0.0;
    double a_dip = -1.0;  // -1 when not computed
    std::string error;
};

struct BoundaryPoint {
    double beta = 0.0;
    double left = std::numeric_limits<double>::quiet_NaN();   // normal -> amplifying
    double right = std::numeric_limits<double>::quiet_NaN();  // amplifying -> normal
    bool right_beyond_grid = false;
};

struct AmplificationMap {
    double v = 0.0, n_atoms = 0.0;
    std::vector<double> depth_grid, beta_grid;
    std::vector<AmplificationCell> cells;  // beta-major
    std::vector<BoundaryPoint> boundary;
};

struct AmplificationOptions {
    int n_min = -3, n_max = 3;
    int adip_stride = 4;      // 0 disables the mean-field overlay
    double adip_window = 40.0;
    bool refine_boundary = true;
    double boundary_tol = 1e-3;
    unsigned threads = 1;
    LatticeOptions lattice;
};

AmplificationMap amplification_scan(const LatticeSpec& spec, double v,
                                    const std::vector<double>& depth_grid,
                                    const std::vector<double>& beta_grid, double n_atoms,
                                    const AmplificationOptions& opt = {});

}  // namespace wscav
