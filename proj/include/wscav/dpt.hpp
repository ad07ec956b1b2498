#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wscav/lattice.hpp"
#include "wscav/meanfield.hpp"

namespace wscav {

// Two-mode reduction onto phi_{-1} and phi_0. s_z = -1 puts every atom in phi_0
// and n_eff = omega_x s_x + delta s_z + omega_bar.

struct TwoModeParams {
    double delta = 0.0;      // (J_{-1,-1} - J_{0,0}) / 2
    double omega_x = 0.0;    // J_{-1,0}
    double omega_bar = 0.0;  // (J_{-1,-1} + J_{0,0}) / 2

    static TwoModeParams from_coupling(const CouplingMatrix& j);
    double radius() const;   // sqrt(omega_x^2 + delta^2)
    double n_eff(double sx, double sz) const { return omega_x * sx + delta * sz + omega_bar; }
};

struct SpinState {
    double sx = 0.0, sy = 0.0, sz = -1.0;
    double length() const;
};

struct SpinTrajectory {
    std::vector<double> times;  // T_B
    std::vector<SpinState> s;
    std::vector<double> n_eff;
    double max_length_drift = 0.0;
    double max_energy_drift = 0.0;
    double max_reduction_residual = 0.0;  // |(dn/dt)^2 + f(n)|
};

/// Conserved functional -s_z + 2 V n / (1 + beta n), equal to -s_z - (2V/beta)/(1 + beta n)
/// up to the constant 2V/beta.
double spin_energy(const TwoModeParams& p, double v, double beta, const SpinState& s);

SpinTrajectory evolve_spin(const TwoModeParams& p, double v, double beta, const SpinState& init,
                           double horizon, const Sampling& smp = {});

enum class RootInterval { Geometric, Supplement };

struct EffectivePotential {
    TwoModeParams p;
    double v = 0.0, beta = 0.0;
    double n0 = 0.0;           // omega_bar - delta, the initial n_eff
    double lo = 0.0, hi = 0.0; // search interval
    std::vector<double> roots;
    std::vector<double> double_roots;
    int scan_points = 0;

    /// f(n) = -omega_x^2 s_y^2(n); zero where the motion turns.
    double operator()(double n) const;
    double sz(double n) const;
    double sx(double n) const;
};

EffectivePotential effective_potential(const TwoModeParams& p, double v, double beta,
                                       RootInterval mode = RootInterval::Geometric,
                                       int n_scan = 2000);

enum class Phase { FM, PM, Crossover, Boundary };
std::string to_string(Phase p);

struct PhaseClassification {
    Phase label = Phase::FM;
    int root_count = 0;
    double turning_point = 0.0;  // nearest root beyond n0 in the direction of motion
    double n0 = 0.0;
    double beta_critical = 0.0;
    /// Label ignoring the beta threshold (FM/PM from the turning point).
    Phase local_label = Phase::FM;
};

struct CriticalBeta {
    double beta = 0.0;
    double v_at = 0.0;      // a V with four roots at the returned beta
    double resolution = 0.0;
    bool found = false;
};

/// Smallest beta for which some V in [v_lo, v_hi] gives four roots; bisection
/// in beta over a dense V scan.
CriticalBeta critical_beta(const TwoModeParams& p, double v_lo = 0.0, double v_hi = 10.0,
                           int n_v = 2001, double beta_lo = 1e-3, double beta_hi = 5.0,
                           double tol = 1e-4);

PhaseClassification classify_phase(const TwoModeParams& p, double v, double beta,
                                   std::optional<double> beta_critical = std::nullopt);

struct PhaseCell {
    double v = 0.0, beta = 0.0;
    double order_parameter = 0.0;  // time-averaged n_eff over the horizon
    double half_window_change = 0.0;  // relative change when the window is halved
    int root_count = 0;
    Phase label = Phase::FM;
    double max_n_eff = 0.0;
    std::string error;
};

struct PhaseDiagram {
    std::vector<double> v_grid, beta_grid;
    std::vector<PhaseCell> cells;  // beta-major: cells[ib * n_v + iv]
    double beta_critical = 0.0;
};

PhaseDiagram phase_diagram(const TwoModeParams& p, const std::vector<double>& v_grid,
                           const std::vector<double>& beta_grid, double horizon = 200.0,
                           unsigned threads = 1);

struct LmgParams {
    double chi = 0.0;     // per collective spin, chi_n / N
    double chi_n = 0.0;   // chi * N, the mean-field nonlinearity
    double rabi = 0.0;
    double detune = 0.0;
    double theta = 0.0;   // s~z = sin(theta) s_x + cos(theta) s_z
    double radius = 0.0;
};

LmgParams lmg_params(const TwoModeParams& p, double v, double beta, double n_atoms);

/// Mean-field LMG dynamics; initial state and output in the original frame.
SpinTrajectory evolve_lmg(const LmgParams& l, const SpinState& init, double horizon,
                          const Sampling& smp = {});

/// Coefficient of s_x s_z left in (omega_x s_x + delta s_z)^2 after the rotation.
double lmg_cross_coupling(const TwoModeParams& p, double theta);

}  // namespace wscav
