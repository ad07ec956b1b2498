#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "wscav/ed.hpp"
#include "wscav/error.hpp"
#include "wscav/lattice.hpp"
#include "wscav/meanfield.hpp"

using namespace wscav;
using cd = std::complex<double>;

namespace {
const CouplingMatrix& coupling(double depth) {
    static std::map<double, CouplingMatrix> cache;
    auto it = cache.find(depth);
    if (it == cache.end())
        it = cache.emplace(depth, build_lattice_model(find_species("Rb87").lattice(depth), -3, 3).coupling).first;
    return it->second;
}

const CavityDrive kBench{-400.0, 0.0, 40.0, 100.0};
constexpr int kN = 6;

double binom(int n, int k) {
    double r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

Eigen::MatrixXd number_operator(const FockBasis& b) {
    return one_body_operator(b, Eigen::MatrixXd::Identity(b.n_modes, b.n_modes));
}

double ladder_energy(const FockBasis& b, const std::vector<int>& occ) {
    double e = 0;
    for (int m = 0; m < b.n_modes; ++m) e += (b.first_site + m) * occ[m];
    return e;
}
}  // namespace

TEST_SUITE("fock basis") {
    TEST_CASE("dimensions") {
        CHECK(build_fock_basis(6, 3).dim() == 28);
        CHECK(build_fock_basis(6, 3, 10).dim() == 308);
        CHECK(build_fock_basis(1, 2).dim() == 2);
        for (int n = 1; n <= 7; ++n)
            for (int k = 1; k <= 4; ++k) {
                CHECK(build_fock_basis(n, k).atom_dim() == binom(n + k - 1, k - 1));
                CHECK(fock_dimension(n, k, 3) == 4 * binom(n + k - 1, k - 1));
            }
    }
    TEST_CASE("index round trip and ordering") {
        auto b = build_fock_basis(4, 3, 2, -1);
        for (int i = 0; i < b.atom_dim(); ++i) {
            CHECK(b.atom_index(b.states[i]) == i);
            for (int p = 0; p <= 2; ++p) CHECK(b.index(b.states[i], p) == i * 3 + p);
            int sum = 0;
            for (int x : b.states[i]) sum += x;
            CHECK(sum == 4);
            if (i) CHECK(std::lexicographical_compare(b.states[i - 1].begin(), b.states[i - 1].end(),
                                                      b.states[i].begin(), b.states[i].end()));
        }
        CHECK_THROWS(b.atom_index({1, 1, 1}));
    }
    TEST_CASE("overflow is refused") {
        CHECK_THROWS_AS(build_fock_basis(40, 8, 10), ConfigError);
    }
}

TEST_SUITE("hamiltonians") {
    TEST_CASE("hermitian and number conserving") {
        auto bc = build_fock_basis(kN, 3, 10, -1);
        auto ba = build_fock_basis(kN, 3, std::nullopt, -1);
        auto hc = build_atom_cavity_h(bc, coupling(6.2), kBench);
        auto ha = build_atom_only_h(ba, coupling(6.2), 1.0, 1.5, kN);
        CHECK((hc.h - hc.h.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((ha.h - ha.h.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
        const Eigen::MatrixXd na = number_operator(ba);
        CHECK((na - kN * Eigen::MatrixXd::Identity(ba.dim(), ba.dim())).cwiseAbs().maxCoeff() < 1e-14);
        const Eigen::MatrixXcd nac = na.cast<cd>();
        CHECK((ha.h * nac - nac * ha.h).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(ha.energy_offset == doctest::Approx(-1.0 * kN / 1.5));
    }
    TEST_CASE("one-body operator matrix elements") {
        auto b = build_fock_basis(2, 2);
        Eigen::MatrixXd a(2, 2);
        a << 0.3, 0.7, 0.7, -0.2;
        auto m = one_body_operator(b, a);
        // states: (0,2), (1,1), (2,0)
        CHECK(m(0, 0) == doctest::Approx(2 * -0.2));
        CHECK(m(2, 2) == doctest::Approx(2 * 0.3));
        CHECK(m(1, 1) == doctest::Approx(0.1));
        CHECK(m(1, 0) == doctest::Approx(0.7 * std::sqrt(2.0)));
        CHECK(m(2, 1) == doctest::Approx(0.7 * std::sqrt(2.0)));
        CHECK(m(2, 0) == 0.0);
    }
    TEST_CASE("no drive: empty cavity and free ladder") {
        auto b = build_fock_basis(3, 3, 4, -1);
        CavityDrive d = kBench;
        d.pump = 0.0;
        auto h = build_atom_cavity_h(b, coupling(6.2), d);
        Eigen::VectorXcd psi = fock_state(b, {1, 1, 1}) + fock_state(b, {0, 3, 0});
        psi.normalize();
        auto tr = evolve_ed(b, h, psi, 3.0);
        for (double p : tr.photon_number) CHECK(std::abs(p) < 1e-12);
        for (auto& pop : tr.populations) CHECK((pop - tr.populations.front()).cwiseAbs().maxCoeff() < 1e-10);
    }
    TEST_CASE("no dispersive coupling: direct-sum spectrum") {
        const int cut = 6;
        auto b = build_fock_basis(2, 3, cut, -1);
        CavityDrive d{-7.0, 0.0, cd(1.3, 0.4), 0.0};
        auto h = build_atom_cavity_h(b, coupling(6.0), d);
        Eigen::MatrixXcd ph = Eigen::MatrixXcd::Zero(cut + 1, cut + 1);
        for (int p = 0; p <= cut; ++p) ph(p, p) = 7.0 * p;
        for (int p = 0; p < cut; ++p) {
            ph(p + 1, p) = d.pump * std::sqrt(p + 1.0);
            ph(p, p + 1) = std::conj(d.pump) * std::sqrt(p + 1.0);
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es_ph(ph), es(h.h);
        std::vector<double> expect;
        for (const auto& occ : b.states)
            for (int k = 0; k <= cut; ++k) expect.push_back(ladder_energy(b, occ) + es_ph.eigenvalues()[k]);
        std::sort(expect.begin(), expect.end());
        for (int i = 0; i < b.dim(); ++i) CHECK(es.eigenvalues()[i] == doctest::Approx(expect[i]).epsilon(1e-10));
    }
    TEST_CASE("weak feedback limit is linear in N_eff") {
        auto b = build_fock_basis(kN, 3, std::nullopt, -1);
        const auto& j = coupling(6.2);
        auto h = build_atom_only_h(b, j, 1.0, 1e-8, kN);
        Eigen::MatrixXd jm = j.entries.block(2, 2, 3, 3);
        Eigen::MatrixXcd ref = one_body_operator(b, jm).cast<cd>();
        for (int i = 0; i < b.dim(); ++i) ref(i, i) += ladder_energy(b, b.states[i]);
        CHECK((h.h - ref).cwiseAbs().maxCoeff() < 1e-6);
    }
    TEST_CASE("cavity operator identity") {
        auto b = build_fock_basis(kN, 3, std::nullopt, -1);
        const auto& j = coupling(6.2);
        Eigen::MatrixXd jm = j.entries.block(2, 2, 3, 3);
        const Eigen::MatrixXd neff = one_body_operator(b, jm);
        for (double beta : {0.5, 1.5, 3.0}) {
            const Eigen::MatrixXd c = cavity_operator(b, j, 1.0, beta, kN);
            const Eigen::MatrixXd lhs = (Eigen::MatrixXd::Identity(b.dim(), b.dim()) + beta / kN * neff) * c;
            CHECK((lhs + (1.0 * kN / beta) * Eigen::MatrixXd::Identity(b.dim(), b.dim())).cwiseAbs().maxCoeff() < 1e-10);
        }
    }
    TEST_CASE("no cavity: ladder spectrum") {
        auto b = build_fock_basis(kN, 3, std::nullopt, -1);
        auto h = build_atom_only_h(b, coupling(6.2), 0.0, 1.5, kN);
        for (int i = 0; i < b.dim(); ++i) {
            CHECK(h.h(i, i).real() == doctest::Approx(ladder_energy(b, b.states[i])));
            for (int k = 0; k < b.dim(); ++k)
                if (k != i) CHECK(std::abs(h.h(i, k)) == 0.0);
        }
    }
    TEST_CASE("negative feedback is refused") {
        auto b = build_fock_basis(kN, 3, std::nullopt, -1);
        CHECK_THROWS_AS(build_atom_only_h(b, coupling(6.2), 1.0, -20.0, kN), ConfigError);
    }
}

TEST_SUITE("ed evolution") {
    TEST_CASE("eigenstates are stationary, norm and atom number are exact") {
        auto b = build_fock_basis(kN, 3, std::nullopt, -1);
        auto h = build_atom_only_h(b, coupling(6.2), 1.0, 1.5, kN);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h.h);
        auto tr = evolve_ed(b, h, es.eigenvectors().col(3), 5.0);
        for (auto& p : tr.populations) CHECK((p - tr.populations.front()).cwiseAbs().maxCoeff() < 1e-10);
        auto t2 = evolve_ed(b, h, fock_state(b, {0, 6, 0}), 10.0);
        CHECK(t2.max_norm_drift < 1e-12);
        CHECK(t2.max_atom_number_drift < 1e-10);
    }
    TEST_CASE("benchmark: normal and amplifying depths") {
        auto ba = build_fock_basis(kN, 3, std::nullopt, -1);
        auto bc = build_fock_basis(kN, 3, 10, -1);
        const std::vector<int> start{0, 6, 0};
        for (double depth : {5.8, 6.2}) {
            const auto& j = coupling(depth);
            auto ta = evolve_ed(ba, build_atom_only_h(ba, j, kBench.v(), kBench.beta(kN), kN), fock_state(ba, start), 10.0);
            auto hc = build_atom_cavity_h(bc, j, kBench);
            auto tc = evolve_ed(bc, hc, dressed_state(bc, j, kBench, start), 10.0);
            CHECK(tc.top_photon_population < 1e-6);
            CHECK(tc.warnings.empty());
            CHECK(tc.max_atom_number_drift < 1e-10);
            double gap = 0.0, min0 = kN, max1 = 0.0;
            for (std::size_t k = 0; k < ta.times.size(); ++k) {
                gap = std::max(gap, (ta.populations[k] - tc.populations[k]).cwiseAbs().maxCoeff());
                min0 = std::min(min0, ta.populations[k][1]);
                max1 = std::max(max1, ta.populations[k][2]);
            }
            CHECK(gap < 0.1);
            if (depth == 5.8) CHECK(min0 > 5.5);
            else CHECK(max1 > 1.0);

            CouplingMatrix j3 = j;
            j3.n_min = -1;
            j3.n_max = 1;
            j3.entries = j.entries.block(2, 2, 3, 3);
            auto mf = evolve_atom_only(MeanFieldState::localized(-1, 1, 0), j3, kBench.v(), kBench.beta(kN), 5.0);
            double d = 0.0;
            for (std::size_t k = 0; k < mf.times.size(); ++k)
                d = std::max(d, (mf.populations[k] - ta.populations[k] / kN).cwiseAbs().maxCoeff());
            CHECK(d < 0.15);
        }
    }
}
