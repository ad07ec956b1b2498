#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "wscav/error.hpp"
#include "wscav/lattice.hpp"

namespace wscav {

namespace {

double bessel(int k, double y) {
    const double v = std::cyl_bessel_j(static_cast<double>(std::abs(k)), y);
    return (k < 0 && (k % 2)) ? -v : v;
}

int auto_margin(double y) {
    int k = 2;
    while (k < 400 && (k <= y || std::abs(bessel(k, y)) > 1e-17)) ++k;
    return k;
}

// Hopping amplitudes: E_0(q) = t_0 + 2 sum_{d>0} t_d cos(d pi q), from a fine midpoint rule.
std::vector<double> hoppings(double v0, int range) {
    const int nq = 512;
    std::vector<double> t(range + 1, 0.0);
    for (int k = 0; k < nq; ++k) {
        const double q = -1.0 + (k + 0.5) * 2.0 / nq;
        const double e = band_energies(v0, q, 1)[0];
        for (int d = 0; d <= range; ++d) t[d] += e * std::cos(d * constants::pi * q) / nq;
    }
    return t;
}

}  // namespace

void WannierStarkBasis::evaluate(double x, Eigen::Ref<Eigen::VectorXd> out,
                                 Eigen::VectorXcd& scratch) const {
    wannier->bloch_sums(x, scratch);
    out = (bloch_weights.transpose() * scratch).real();
}

double WannierStarkBasis::phi(int n, double x) const {
    Eigen::VectorXd out(size());
    Eigen::VectorXcd z;
    evaluate(x, out, z);
    return out[n - n_min];
}

WannierStarkBasis build_ws_basis(const LatticeSpec& spec, const WannierFunction& w, double j0,
                                 int n_min, int n_max, const WsOptions& opt) {
    spec.validate();
    return build_ws_basis(spec.bloch_energy_in_recoil(), w, j0, n_min, n_max, opt);
}

WannierStarkBasis build_ws_basis(double bloch_energy, const WannierFunction& w, double j0,
                                 int n_min, int n_max, const WsOptions& opt) {
    if (n_max < n_min) throw ConfigError("build_ws_basis: empty site range");
    if (!(bloch_energy > 0.0)) throw ConfigError("build_ws_basis: the tilt must be positive");
    if (w.band != 0) throw ConfigError("build_ws_basis: the ladder is built from the ground band");

    WannierStarkBasis b;
    b.n_min = n_min;
    b.n_max = n_max;
    b.tunneling_j0 = j0;
    b.bloch_energy = bloch_energy;
    b.bessel_argument = 2.0 * j0 / bloch_energy;
    b.method = opt.method;
    b.wannier = std::make_shared<WannierFunction>(w);
    const double y = b.bessel_argument;

    int margin = opt.bessel_margin;
    if (margin < 0) {
        margin = auto_margin(y);
    } else if (std::abs(bessel(margin, y)) >= opt.boundary_weight) {
        std::ostringstream os;
        os << "build_ws_basis: Wannier range truncated too early: weight J_" << margin << "(" << y
           << ") = " << bessel(margin, y) << " exceeds " << opt.boundary_weight;
        throw NumericalError(os.str());
    }
    b.a_min = n_min - margin;
    b.a_max = n_max + margin;
    const int na = b.a_max - b.a_min + 1, ns = b.size();
    b.coefficients = Eigen::MatrixXd::Zero(na, ns);

    if (opt.method == WsMethod::TightBindingBessel) {
        for (int n = n_min; n <= n_max; ++n)
            for (int a = b.a_min; a <= b.a_max; ++a)
                b.coefficients(a - b.a_min, n - n_min) = bessel(a - n, y);
    } else {
        // Diagonalize the tilted band in the Wannier basis on a padded window,
        // keeping every Fourier component of the dispersion.
        const int pad = 12, range = 6;
        const auto t = hoppings(w.depth_v0, range);
        const int lo = b.a_min - pad, hi = b.a_max + pad, dim = hi - lo + 1;
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
        for (int i = 0; i < dim; ++i) {
            h(i, i) = (lo + i) * bloch_energy + t[0];
            for (int d = 1; d <= range && i + d < dim; ++d) h(i, i + d) = h(i + d, i) = t[d];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
        if (es.info() != Eigen::Success) throw NumericalError("build_ws_basis: eigensolver failed");
        for (int n = n_min; n <= n_max; ++n) {
            Eigen::Index best = 0;
            (es.eigenvalues().array() - (n * bloch_energy + t[0])).abs().minCoeff(&best);
            Eigen::VectorXd v = es.eigenvectors().col(best);
            if (v[n - lo] < 0) v = -v;
            for (int a = b.a_min; a <= b.a_max; ++a) b.coefficients(a - b.a_min, n - n_min) = v[a - lo];
        }
    }

    const auto& q = w.quasimomenta();
    const int nq = static_cast<int>(q.size());
    b.bloch_weights = Eigen::MatrixXcd::Zero(nq, ns);
    for (int k = 0; k < nq; ++k)
        for (int a = b.a_min; a <= b.a_max; ++a) {
            const std::complex<double> e = std::polar(1.0, -q[k] * a * constants::pi);
            b.bloch_weights.row(k) += e * b.coefficients.row(a - b.a_min);
        }
    return b;
}

}  // namespace wscav
