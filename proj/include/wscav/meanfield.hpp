#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "wscav/lattice.hpp"
#include "wscav/numerics.hpp"

namespace wscav {

// Dynamics are written in units of omega_B: time t is measured in 1/omega_B
// internally, so one Bloch period T_B is 2*pi. Public horizons and sample
// times are in T_B.

inline constexpr double kTwoPi = 2.0 * constants::pi;

/// Driven cavity parameters, all angular frequencies in the same unit.
struct CavityDrive {
    double detuning_c = 0.0;              // Delta_c
    double linewidth = 0.0;               // kappa
    std::complex<double> pump{0.0, 0.0};  // eta_p
    double coupling_sq_over_det = 0.0;    // G0^2 / Delta_0

    /// V = (G0^2/Delta_0) |eta_p|^2 / Delta_c^2.
    double v() const;
    /// beta = -N (G0^2/Delta_0) / Delta_c.
    double beta(double n_atoms) const;
    CavityDrive scaled(double unit) const;  // every rate divided by `unit`
};

struct MeanFieldState {
    int n_min = 0;
    Eigen::VectorXcd amplitudes;
    std::optional<std::complex<double>> cavity_alpha;
    double time = 0.0;  // T_B

    int n_max() const { return n_min + static_cast<int>(amplitudes.size()) - 1; }
    double norm() const { return amplitudes.squaredNorm(); }
    static MeanFieldState localized(int n_min, int n_max, int site);
};

struct IntegratorStats {
    std::size_t steps = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evals = 0;
    double max_norm_drift = 0.0;
    double max_energy_drift = 0.0;  // relative; atom-only only
};

struct Trajectory {
    int n_min = 0;
    std::vector<double> times;                // T_B
    std::vector<Eigen::VectorXd> populations; // rho_n per sample
    std::vector<double> signal;               // N_eff/N
    std::vector<double> photon_number;        // |alpha|^2, empty for atom-only runs
    IntegratorStats stats;
    MeanFieldState final_state;

    std::vector<double> rho(int n) const;
};

struct Sampling {
    double dt = 1.0 / 64.0;  // T_B
    numerics::OdeOptions ode;
};

double n_eff(const MeanFieldState& state, const CouplingMatrix& j);
double n_eff(const Eigen::VectorXcd& c, const Eigen::MatrixXd& j);

/// Mean-field energy sum n|c_n|^2 + V n_eff / (1 + beta n_eff), in omega_B. This
/// differs from sum n|c_n|^2 - (V/beta)/(1 + beta n_eff) by the constant -V/beta
/// and stays finite at beta = 0.
double meanfield_energy(const Eigen::VectorXcd& c, const Eigen::MatrixXd& j, int n_min, double v,
                        double beta);

struct QuenchResult {
    MeanFieldState state;
    double ground_band_fraction = 0.0;
    Eigen::VectorXd overlaps;  // <phi_n^shallow | w^deep_site>, before renormalization
    std::vector<std::string> warnings;
};

QuenchResult prepare_quench_state(const LatticeSpec& spec, double deep_depth, double shallow_depth,
                                  int site, int n_min, int n_max, const LatticeOptions& opt = {});

struct ModulationResult {
    MeanFieldState state;
    double coupling = 0.0;      // t_m in omega_B
    int sideband = 0;
    double detuning = 0.0;      // omega - m omega_B, in omega_B
    Eigen::MatrixXd t_matrix;   // V1 int sin^2(x) phi_a phi_b, in omega_B
    std::vector<std::string> warnings;
};

/// Modulate the depth by v1 (E_R) at angular frequency omega (units of omega_B)
/// with the given phase for `duration` T_B, starting from phi_0. The sideband
/// drive is treated in the rotating-wave approximation.
ModulationResult prepare_modulated_state(const LatticeModel& model, double v1, double omega,
                                         double phase, double duration);

Trajectory evolve_atom_only(const MeanFieldState& state, const CouplingMatrix& j, double v,
                            double beta, double horizon, const Sampling& s = {});

struct AtomCavityOptions {
    Sampling sampling;
    bool adiabatic_initial_field = true;  // start alpha on the adiabatic value
};

/// `drive` must already be expressed in units of omega_B.
Trajectory evolve_atom_cavity(const MeanFieldState& state, const CouplingMatrix& j,
                              const CavityDrive& drive, double n_atoms, double horizon,
                              const AtomCavityOptions& opt = {});

/// |alpha|^2 of the adiabatically eliminated field at the given n_eff.
double adiabatic_photon_number(const CavityDrive& drive, double n_atoms, double n_eff);

/// 1 - min rho_0 over t in [0, window] (T_B).
double a_dip(const Trajectory& traj, double window = 40.0);

struct SpectrumPeak {
    bool found = false;
    double frequency = 0.0;  // omega_B
    double power = 0.0;
    double resolution = 0.0; // 1 / duration, in omega_B
};

/// Dominant frequency of a uniformly sampled real signal (times in T_B) after
/// mean removal, from a Hann-windowed periodogram refined by Brent search.
SpectrumPeak dominant_frequency(const std::vector<double>& times, const std::vector<double>& x);
SpectrumPeak bo_spectrum(const Trajectory& traj);

}  // namespace wscav
