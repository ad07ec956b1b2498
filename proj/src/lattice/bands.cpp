#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "wscav/error.hpp"
#include "wscav/lattice.hpp"

namespace wscav {

namespace {

void tridiagonal(double v0, double q, int cutoff, Eigen::VectorXd& diag, Eigen::VectorXd& off) {
    const int dim = 2 * cutoff + 1;
    diag.resize(dim);
    off.resize(dim - 1);
    for (int i = 0; i < dim; ++i) {
        const double k = q + 2.0 * (i - cutoff);
        diag[i] = k * k + v0 / 2.0;
    }
    off.setConstant(-v0 / 4.0);
}

struct Eig {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
};

Eig solve(double v0, double q, int cutoff, bool vectors) {
    Eigen::VectorXd d, e;
    tridiagonal(v0, q, cutoff, d, e);
    // computeFromTridiagonal skips the scaling that compute() applies; without it the
    // QL sweep occasionally stalls on the near-degenerate high plane waves.
    const double scale = d.cwiseAbs().maxCoeff();
    d /= scale;
    e /= scale;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(d, e, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        std::ostringstream os;
        os << "band eigensolver failed at q=" << q << " (depth " << v0 << ", cutoff " << cutoff
           << " plane waves each side)";
        throw NumericalError(os.str());
    }
    return {es.eigenvalues() * scale, vectors ? Eigen::MatrixXd(es.eigenvectors()) : Eigen::MatrixXd()};
}

}  // namespace

int plane_wave_cutoff(int n_bands) { return std::max(15, n_bands + 4); }

Eigen::VectorXd band_energies(double depth_v0, double q, int n_bands, int cutoff) {
    if (cutoff <= 0) cutoff = plane_wave_cutoff(n_bands);
    return solve(depth_v0, q, cutoff, false).values.head(n_bands);
}

double BandStructure::energy(int band, double q) const {
    return band_energies(depth_v0, q, band + 1, cutoff)[band];
}

BandStructure compute_band_structure(double depth_v0, int n_bands, int n_q) {
    if (n_bands < 1) throw ConfigError("compute_band_structure: n_bands must be >= 1");
    if (n_q < 16) throw ConfigError("compute_band_structure: n_q must be >= 16");
    if (n_q % 2) throw ConfigError("compute_band_structure: n_q must be even");
    if (!(depth_v0 >= 0.0)) throw ConfigError("compute_band_structure: depth must be >= 0");

    BandStructure bs;
    bs.depth_v0 = depth_v0;
    bs.n_bands = n_bands;
    bs.cutoff = plane_wave_cutoff(n_bands);
    const int dim = 2 * bs.cutoff + 1;
    bs.energies.resize(n_bands, n_q);
    bs.coefficients.assign(n_bands, Eigen::MatrixXd(dim, n_q));
    bs.quasimomenta.resize(n_q);
    for (int k = 0; k < n_q; ++k) {
        const double q = -1.0 + (k + 0.5) * 2.0 / n_q;
        bs.quasimomenta[k] = q;
        auto es = solve(depth_v0, q, bs.cutoff, true);
        for (int b = 0; b < n_bands; ++b) {
            bs.energies(b, k) = es.values[b];
            Eigen::VectorXd c = es.vectors.col(b);
            // real gauge: w(0) > 0 for even bands, w'(0) > 0 for odd bands
            double s = 0.0;
            for (int i = 0; i < dim; ++i) s += (b % 2 ? (q + 2.0 * (i - bs.cutoff)) : 1.0) * c[i];
            if (s < 0) c = -c;
            bs.coefficients[b].col(k) = c;
        }
    }
    return bs;
}

BandStructure compute_band_structure(const LatticeSpec& spec, int n_bands, int n_q) {
    spec.validate();
    return compute_band_structure(spec.depth_v0, n_bands, n_q);
}

double tunneling_rate(double depth_v0) {
    const auto e0 = band_energies(depth_v0, 0.0, 1);
    const auto e1 = band_energies(depth_v0, 1.0, 1);
    return (e1[0] - e0[0]) / 4.0;
}

double tunneling_rate(const BandStructure& bands) {
    return (bands.energy(0, 1.0) - bands.energy(0, 0.0)) / 4.0;
}

double min_band_gap(const BandStructure& bands, int lower_band) {
    if (lower_band < 0 || lower_band + 1 >= bands.n_bands)
        throw ConfigError("min_band_gap: need bands b and b+1 in the structure");
    double gap = (bands.energies.row(lower_band + 1) - bands.energies.row(lower_band)).minCoeff();
    for (double q : {0.0, 1.0}) {
        const auto e = band_energies(bands.depth_v0, q, lower_band + 2, bands.cutoff);
        gap = std::min(gap, e[lower_band + 1] - e[lower_band]);
    }
    return gap;
}

}  // namespace wscav
