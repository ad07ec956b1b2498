#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wscav/lattice.hpp"
#include "wscav/units.hpp"

namespace wscav {

/// omega_B = M g a_l / hbar in rad/s.
double bloch_frequency(const LatticeSpec& spec);

struct DecoherenceRates {
    double dephasing = 0.0;   // V beta kappa / Delta_c   [omega_B]
    double scattering = 0.0;  // V gamma / Delta_0       [omega_B]
    // rate relative to omega_B / (50 * 2 pi): below 1 means under one event in 50 Bloch periods
    double dephasing_budget = 0.0;
    double scattering_budget = 0.0;
};
DecoherenceRates decoherence_rates(double v, double beta, double kappa_over_dc, double gamma_over_d0);

/// C = 4 G0^2 / (gamma kappa); any consistent frequency unit.
double cooperativity(double g0, double kappa, double gamma);

enum class MathieuType { A, B };
/// Characteristic value a_r(q) (even, type A) or b_r(q) (odd, type B) of
/// y'' + (a - 2 q cos 2x) y = 0, via truncated tridiagonal eigenproblems.
double mathieu_characteristic(double q, int order, MathieuType type);

struct RadialNoiseSpec {
    double trap_freq = 0.0;    // omega_r [rad/s]
    double temperature = 0.0;  // [K]
    double beam_width = 0.0;   // w_l [m]
    double depth_v0 = 0.0;     // [E_R]
    void validate() const;
};

struct RadialNoiseResult {
    double omega_r0 = 0.0;          // rad/s
    double slope = 0.0;             // |d a0/dv0 - d b1/dv0|
    double slope_richardson = 0.0;  // same with h/2, Richardson-combined
    double thermal_factor = 0.0;    // 2(e^x + 2)/(e^x - 1)^2, exact partition function
    double thermal_factor_classical = 0.0;  // same sum with Z = (kT / hbar omega_r)^2
    double delta_j0 = 0.0;             // E_R
    double delta_j0_classical = 0.0;   // E_R
    double j0 = 0.0;                   // E_R
    double j00 = 0.0;
    double delta_j00 = 0.0;
    double relative_delta_j00 = 0.0;
    double delta_j00_classical = 0.0;
};

/// Depth and gravity come from `noise.depth_v0` and `spec`; the WS basis is
/// rebuilt with J0 +- Delta J0 and J_{0,0} differenced.
RadialNoiseResult radial_j0_std(const RadialNoiseSpec& noise, const LatticeSpec& spec,
                                const WsOptions& ws = {}, const QuadratureSettings& q = {});

/// Direct sum over (n_x, n_y) of p * (n_x + n_y)^2 up to `cutoff`, for checking the closed form.
double thermal_factor_sum(double x, int cutoff, bool classical_partition);

struct LoadingSpec {
    double epsilon = 0.05;
    double lattice_length = 1e-3;  // m
    std::uint64_t rng_seed = 0;
    std::optional<int> subsample;  // random subset of loaded sites if set
    void validate() const;
};

struct LoadingResult {
    int candidate_sites = 0;
    std::vector<long> loaded_sites;
    std::vector<double> j00;
    double mean = 0.0;
    double std_dev = 0.0;
};

LoadingResult loading_error_std(const LoadingSpec& load, const LatticeSpec& spec,
                                const LatticeOptions& opt = {});

}  // namespace wscav
