#pragma once

#include <numbers>
#include <string>
#include <vector>

namespace wscav {

namespace constants {
inline constexpr double hbar = 1.054571817e-34;        // J s
inline constexpr double kB = 1.380649e-23;             // J/K
inline constexpr double amu = 1.66053906660e-27;       // kg
inline constexpr double standard_gravity = 9.80;       // m/s^2
inline constexpr double pi = std::numbers::pi;
}  // namespace constants

// Physical configuration of the tilted lattice inside the cavity. All fields
// are SI at the boundary; numerics work in units of 1/k_l (length) and E_R
// (energy), with dynamics in units of omega_B.
struct LatticeSpec {
    double mass = 0.0;           // kg
    double lambda_l = 0.0;       // m
    double lambda_c = 0.0;       // m
    double depth_v0 = 0.0;       // E_R
    double gravity = constants::standard_gravity;  // m/s^2
    double cavity_offset = 0.0;  // m; 0 puts site n=0 at a node of sin^2(k_c z)

    void validate() const;

    double lattice_spacing() const { return lambda_l / 2.0; }
    double k_l() const { return 2.0 * constants::pi / lambda_l; }
    double k_c() const { return 2.0 * constants::pi / lambda_c; }
    double recoil_energy() const;       // J
    double bloch_frequency() const;     // rad/s
    /// hbar*omega_B / E_R.
    double bloch_energy_in_recoil() const;
    /// k_c / k_l = lambda_l / lambda_c.
    double wavenumber_ratio() const { return lambda_l / lambda_c; }
    /// Cavity phase k_c * cavity_offset, the shift of sin^2 relative to site 0.
    double cavity_phase() const { return k_c() * cavity_offset; }

    LatticeSpec with_depth(double v0) const {
        LatticeSpec s = *this;
        s.depth_v0 = v0;
        return s;
    }
};

struct SpeciesProfile {
    std::string name;
    double mass_amu;
    double lambda_l_nm;
    double lambda_c_nm;
    double magic_depth_er;  // tabulated reference value

    LatticeSpec lattice(double depth_v0) const;
};

const std::vector<SpeciesProfile>& species_profiles();
/// Accepts "Rb87", "87Rb", "rb87" and similar spellings.
const SpeciesProfile& find_species(const std::string& name);

}  // namespace wscav
