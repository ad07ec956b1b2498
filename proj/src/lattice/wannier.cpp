#include <cmath>
#include <complex>
#include <sstream>

#include "wscav/error.hpp"
#include "wscav/lattice.hpp"

namespace wscav {

WannierFunction::WannierFunction(const BandStructure& bands, int band_index, int center)
    : center_site(center), band(band_index), depth_v0(bands.depth_v0) {
    if (band_index < 0 || band_index >= bands.n_bands)
        throw ConfigError("compute_wannier: band index outside the computed bands");
    // isolated band: gaps to both neighbours must stay open
    const double tiny = 1e-9;
    if (band_index + 1 < bands.n_bands && min_band_gap(bands, band_index) <= tiny) {
        std::ostringstream os;
        os << "compute_wannier: band " << band_index << " touches band " << band_index + 1
           << " at depth " << bands.depth_v0 << " E_R; refusing to build a Wannier function";
        throw ConfigError(os.str());
    }
    if (band_index > 0 && min_band_gap(bands, band_index - 1) <= tiny) {
        std::ostringstream os;
        os << "compute_wannier: band " << band_index << " touches band " << band_index - 1
           << " at depth " << bands.depth_v0 << " E_R";
        throw ConfigError(os.str());
    }
    if (band_index + 1 == bands.n_bands) {
        const auto e = band_energies(bands.depth_v0, 1.0, band_index + 2, bands.cutoff);
        const auto e0 = band_energies(bands.depth_v0, 0.0, band_index + 2, bands.cutoff);
        if (std::min(e[band_index + 1] - e[band_index], e0[band_index + 1] - e0[band_index]) <= tiny)
            throw ConfigError("compute_wannier: band is not isolated (gap closes)");
    }
    q_ = bands.quasimomenta;
    cutoff_ = bands.cutoff;
    coeff_ = bands.coefficients[band_index];
    odd_ = band_index % 2 == 1;
}

void WannierFunction::bloch_sums(double u, Eigen::VectorXcd& z) const {
    const int dim = 2 * cutoff_ + 1;
    const int nq = static_cast<int>(q_.size());
    Eigen::VectorXd c(dim), s(dim);
    for (int i = 0; i < dim; ++i) {
        const double arg = 2.0 * (i - cutoff_) * u;
        c[i] = std::cos(arg);
        s[i] = std::sin(arg);
    }
    const Eigen::VectorXd sr = coeff_.transpose() * c;
    const Eigen::VectorXd si = coeff_.transpose() * s;
    const double pref = 1.0 / (nq * std::sqrt(constants::pi));
    const std::complex<double> phase = odd_ ? std::complex<double>(0.0, -pref) : pref;
    z.resize(nq);
    for (int k = 0; k < nq; ++k)
        z[k] = phase * std::polar(1.0, q_[k] * u) * std::complex<double>(sr[k], si[k]);
}

double WannierFunction::centered(double u) const {
    Eigen::VectorXcd z;
    bloch_sums(u, z);
    return z.sum().real();
}

void WannierFunction::sample(double half_width_sites, int points_per_site, std::vector<double>& grid,
                             std::vector<double>& values) const {
    const int n = static_cast<int>(2 * half_width_sites * points_per_site) + 1;
    grid.resize(n);
    values.resize(n);
    const double x0 = (center_site - half_width_sites) * constants::pi;
    const double dx = constants::pi / points_per_site;
    for (int i = 0; i < n; ++i) {
        grid[i] = x0 + i * dx;
        values[i] = (*this)(grid[i]);
    }
}

WannierFunction compute_wannier(const BandStructure& bands, int band_index, int center) {
    return WannierFunction(bands, band_index, center);
}

}  // namespace wscav
