#pragma once

#include <Eigen/Dense>
#include <complex>
#include <memory>
#include <string>
#include <vector>

#include "wscav/numerics.hpp"
#include "wscav/units.hpp"

namespace wscav {

// Lengths are in 1/k_l (site m sits at x = m*pi), energies in E_R. The single
// particle Hamiltonian is -d^2/dx^2 + v0 sin^2 x, diagonalized in the plane-wave
// basis exp(i(q + 2j)x), |j| <= cutoff, with q in [-1, 1].

struct BandStructure {
    double depth_v0 = 0.0;
    int n_bands = 0;
    int cutoff = 0;
    std::vector<double> quasimomenta;           // midpoint grid, symmetric about 0
    Eigen::MatrixXd energies;                   // n_bands x n_q
    std::vector<Eigen::MatrixXd> coefficients;  // per band: (2*cutoff+1) x n_q, real gauge

    int n_q() const { return static_cast<int>(quasimomenta.size()); }
    /// Direct diagonalization at an arbitrary quasimomentum (not interpolated).
    double energy(int band, double q) const;
};

int plane_wave_cutoff(int n_bands);
/// Lowest `n_bands` eigenvalues of the lattice Hamiltonian at quasimomentum q.
Eigen::VectorXd band_energies(double depth_v0, double q, int n_bands, int cutoff = 0);

BandStructure compute_band_structure(double depth_v0, int n_bands, int n_q);
BandStructure compute_band_structure(const LatticeSpec& spec, int n_bands, int n_q);

/// (E_0(1) - E_0(0)) / 4 in E_R, from direct diagonalization at the zone center and edge.
double tunneling_rate(const BandStructure& bands);
double tunneling_rate(double depth_v0);

/// Smallest separation between band b and b+1 over the zone, including q = 0 and q = 1.
double min_band_gap(const BandStructure& bands, int lower_band);

class WannierFunction {
public:
    WannierFunction() = default;
    WannierFunction(const BandStructure& bands, int band_index, int center_site);

    /// w(x) for the stored center.
    double operator()(double x) const { return centered(x - center_site * constants::pi); }
    /// w for a function centered at the origin.
    double centered(double u) const;

    /// z_k(u) such that w(u - a*pi) = Re sum_k z_k exp(-i q_k a pi) for every integer a.
    /// All translates and Bloch sums of w are then cheap linear forms in z.
    void bloch_sums(double u, Eigen::VectorXcd& z) const;

    /// Samples over center +/- half_width sites.
    void sample(double half_width_sites, int points_per_site, std::vector<double>& grid,
                std::vector<double>& values) const;

    int center_site = 0;
    int band = 0;
    double depth_v0 = 0.0;
    const std::vector<double>& quasimomenta() const { return q_; }

private:
    std::vector<double> q_;
    int cutoff_ = 0;
    Eigen::MatrixXd coeff_;  // (2*cutoff+1) x n_q
    bool odd_ = false;
};

WannierFunction compute_wannier(const BandStructure& bands, int band_index, int center);

enum class WsMethod { TightBindingBessel, NumericalDiagonalization };

struct WannierStarkBasis {
    int n_min = 0, n_max = 0;
    double tunneling_j0 = 0.0;     // E_R
    double bloch_energy = 0.0;     // hbar omega_B / E_R
    double bessel_argument = 0.0;  // y = 2 J0 / (hbar omega_B)
    WsMethod method = WsMethod::TightBindingBessel;
    int a_min = 0, a_max = 0;      // Wannier sites entering the expansion
    Eigen::MatrixXd coefficients;  // (a_max-a_min+1) x n_sites: phi_n = sum_a C(a,n) w_a
    std::shared_ptr<const WannierFunction> wannier;
    Eigen::MatrixXcd bloch_weights;  // n_q x n_sites, sum_a C(a,n) exp(-i q_k a pi)

    int size() const { return n_max - n_min + 1; }
    /// Ladder energy E_n = n hbar omega_B, in units of omega_B.
    double ladder_energy(int n) const { return static_cast<double>(n); }
    /// phi_n(x) for every n in the range.
    void evaluate(double x, Eigen::Ref<Eigen::VectorXd> out, Eigen::VectorXcd& scratch) const;
    double phi(int n, double x) const;
};

struct WsOptions {
    WsMethod method = WsMethod::TightBindingBessel;
    int bessel_margin = -1;       // Wannier sites beyond the range; -1 picks it automatically
    double boundary_weight = 1e-10;
};

WannierStarkBasis build_ws_basis(const LatticeSpec& spec, const WannierFunction& w, double j0,
                                 int n_min, int n_max, const WsOptions& opt = {});
/// Same with hbar*omega_B/E_R given directly.
WannierStarkBasis build_ws_basis(double bloch_energy, const WannierFunction& w, double j0,
                                 int n_min, int n_max, const WsOptions& opt = {});

struct CouplingMatrix {
    int n_min = 0, n_max = 0;
    Eigen::MatrixXd entries;  // symmetric
    double wavenumber_ratio = 0.0;
    double cavity_phase = 0.0;  // k_c * offset
    double error_bound = 0.0;   // largest quadrature error estimate

    int size() const { return n_max - n_min + 1; }
    bool contains(int n) const { return n >= n_min && n <= n_max; }
    double operator()(int m, int n) const { return entries(m - n_min, n - n_min); }
    double delta(int n) const { return ((*this)(n, n) - (*this)(0, 0)) / 2.0; }
    double omega(int n) const { return (*this)(n, n + 1); }
    double omega_bar() const { return ((*this)(-1, -1) + (*this)(0, 0)) / 2.0; }
};

struct QuadratureSettings {
    double abs_tol = 1e-10;
    int margin_sites = 10;  // integration extent beyond the site range
};

/// Integrates phi_m phi_n g_l(x) for several weights g_l at once; returns one
/// symmetric matrix per weight and the largest error estimate.
std::vector<Eigen::MatrixXd> weighted_overlaps(
    const WannierStarkBasis& basis, const std::vector<std::function<double(double)>>& weights,
    double* error_bound = nullptr, const QuadratureSettings& q = {});

Eigen::MatrixXd gram_matrix(const WannierStarkBasis& basis, const QuadratureSettings& q = {});

CouplingMatrix coupling_matrix(const WannierStarkBasis& basis, const LatticeSpec& spec,
                               const QuadratureSettings& q = {});
/// sin^2(ratio*(x + x0)) weighting with an explicit phase x0 (units of 1/k_l).
CouplingMatrix coupling_matrix(const WannierStarkBasis& basis, double ratio, double x0,
                               const QuadratureSettings& q = {});

/// Dependence of J on the cavity phase: J(x0) = (G - Re(exp(2 i r x0) A)) / 2 with
/// G the Gram matrix and A = int phi_m phi_n exp(2 i r x).
struct PhaseResponse {
    int n_min = 0, n_max = 0;
    double wavenumber_ratio = 0.0;
    Eigen::MatrixXd gram;
    Eigen::MatrixXcd a;
    CouplingMatrix at(double x0) const;
};
PhaseResponse phase_response(const WannierStarkBasis& basis, double ratio,
                             const QuadratureSettings& q = {});

/// Everything derived from a spec at one depth.
struct LatticeModel {
    LatticeSpec spec;
    BandStructure bands;
    std::shared_ptr<const WannierFunction> wannier;
    double j0 = 0.0;
    WannierStarkBasis basis;
    CouplingMatrix coupling;
};

struct LatticeOptions {
    int n_bands = 3;
    int n_q = 64;
    WsOptions ws;
    QuadratureSettings quad;
};

LatticeModel build_lattice_model(const LatticeSpec& spec, int n_min, int n_max,
                                 const LatticeOptions& opt = {});

struct MagicDepthResult {
    double depth = 0.0;
    double spread = 0.0;  // max - min of J_nn over n = -1, 0, 1
    bool boundary_hit = false;
    std::vector<std::pair<double, double>> scan;  // (depth, spread)
};

double diagonal_spread(const LatticeSpec& spec, double depth, const LatticeOptions& opt = {});

MagicDepthResult find_magic_depth(const LatticeSpec& spec, double depth_lo, double depth_hi,
                                  double grid_step = 0.25, const LatticeOptions& opt = {});

}  // namespace wscav
