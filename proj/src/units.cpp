#include "wscav/units.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "wscav/error.hpp"

namespace wscav {

void LatticeSpec::validate() const {
    if (!(mass > 0.0)) throw ConfigError("lattice: mass must be positive");
    if (!(lambda_l > 0.0)) throw ConfigError("lattice: lambda_l must be positive");
    if (!(lambda_c > 0.0)) throw ConfigError("lattice: lambda_c must be positive");
    if (!(depth_v0 >= 0.0)) throw ConfigError("lattice: depth_v0 must be non-negative");
    if (!std::isfinite(gravity) || !std::isfinite(cavity_offset))
        throw ConfigError("lattice: gravity and cavity_offset must be finite");
}

double LatticeSpec::recoil_energy() const {
    const double hk = constants::hbar * k_l();
    return hk * hk / (2.0 * mass);
}

double LatticeSpec::bloch_frequency() const {
    return mass * gravity * lattice_spacing() / constants::hbar;
}

double LatticeSpec::bloch_energy_in_recoil() const {
    return mass * gravity * lattice_spacing() / recoil_energy();
}

LatticeSpec SpeciesProfile::lattice(double depth_v0) const {
    LatticeSpec s;
    s.mass = mass_amu * constants::amu;
    s.lambda_l = lambda_l_nm * 1e-9;
    s.lambda_c = lambda_c_nm * 1e-9;
    s.depth_v0 = depth_v0;
    return s;
}

const std::vector<SpeciesProfile>& species_profiles() {
    // Isotope masses from AME2020.
    static const std::vector<SpeciesProfile> profiles = {
        {"Rb87", 86.909180531, 532.0, 780.0, 6.0},
        {"Sr87", 86.908877497, 532.0, 689.0, 5.0},
        {"Sr88", 87.905612253, 532.0, 689.0, 5.0},
        {"Yb171", 170.936331517, 413.0, 556.0, 3.2},
    };
    return profiles;
}

namespace {
std::string canonical(const std::string& name) {
    std::string letters, digits;
    for (char c : name) {
        if (std::isalpha(static_cast<unsigned char>(c)))
            letters += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        else if (std::isdigit(static_cast<unsigned char>(c)))
            digits += c;
    }
    return letters + digits;
}
}  // namespace

const SpeciesProfile& find_species(const std::string& name) {
    const std::string key = canonical(name);
    for (const auto& p : species_profiles())
        if (canonical(p.name) == key) return p;
    throw ConfigError("unknown species profile '" + name + "'");
}

}  // namespace wscav
