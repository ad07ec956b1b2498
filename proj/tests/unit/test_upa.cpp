#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "wscav/error.hpp"
#include "wscav/lattice.hpp"
#include "wscav/meanfield.hpp"
#include "wscav/upa.hpp"

using namespace wscav;

namespace {
LatticeSpec rb(double depth) { return find_species("Rb87").lattice(depth); }

const CouplingMatrix& coupling(double depth, int lo = -8, int hi = 8) {
    static std::map<std::tuple<double, int, int>, CouplingMatrix> cache;
    auto key = std::make_tuple(depth, lo, hi);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, build_lattice_model(rb(depth), lo, hi).coupling).first;
    return it->second;
}

bool has_partner(const Eigen::Vector4cd& ev, std::complex<double> target, double tol) {
    for (int i = 0; i < 4; ++i)
        if (std::abs(ev[i] - target) < tol) return true;
    return false;
}

constexpr double kN = 1e4;
}  // namespace

TEST_SUITE("coefficients") {
    TEST_CASE("closed forms") {
        const auto& j = coupling(6.2);
        auto c = upa_coefficients(j, 2.0, 3.0, kN);
        const double j00 = j(0, 0);
        CHECK(c.j00 == j00);
        CHECK(c.v1 == doctest::Approx(2 * 2.0 / std::pow(1 + 3.0 * j00, 2)).epsilon(1e-15));
        CHECK(c.v2 == doctest::Approx(-(2.0 * 3.0 / kN) / std::pow(1 + 3.0 * j00, 3)).epsilon(1e-15));
        const double d1 = (j(1, 1) - j00) / 2, dm1 = (j(-1, -1) - j00) / 2;
        CHECK(c.delta == doctest::Approx((d1 + dm1) / 2));
        CHECK(c.omega == doctest::Approx((j(0, 1) - j(-1, 0)) / 2));
        // stationary point of a n_1 + b n_-1 + g (X_1 - X_-1)^2 + L (X_1 - X_-1), from a linear solve
        const double a = 1 + c.v1 * c.delta, b = -1 + c.v1 * c.delta, g = c.pair_coupling();
        const double lin = 0.5 * c.v1 * std::sqrt(kN) * c.omega;
        Eigen::Matrix2d h;
        h << a + 4 * g, -4 * g, -4 * g, b + 4 * g;
        const Eigen::Vector2d x = h.fullPivLu().solve(Eigen::Vector2d(-lin, lin));
        CHECK(c.alpha_plus == doctest::Approx(x[0]).epsilon(1e-12));
        CHECK(c.alpha_minus == doctest::Approx(x[1]).epsilon(1e-12));
        CHECK(c.omega_asymmetry < 0.2);
        // Delta_1 and Delta_-1 both nearly vanish close to the magic depth
        CHECK(c.delta_asymmetry > 1.0);
        CHECK(upa_coefficients(coupling(7.3), 2.0, 3.0, kN).delta_asymmetry < 0.2);
    }
    TEST_CASE("linear and undriven limits") {
        auto c = upa_coefficients(coupling(6.0), 2.0, 0.0, kN);
        CHECK(c.v2 == 0.0);
        CHECK(c.v1 == 4.0);
        auto z = upa_coefficients(coupling(6.0), 0.0, 3.0, kN);
        CHECK(z.alpha_plus == 0.0);
        CHECK(z.alpha_minus == 0.0);
        CHECK(z.v1 == 0.0);
        CHECK(z.v2 == 0.0);
        auto s = classify_stability(bdg_matrix(z));
        CHECK_FALSE(s.amplifying);
        std::vector<double> re;
        for (int i = 0; i < 4; ++i) re.push_back(s.eigenvalues[i].real());
        std::sort(re.begin(), re.end());
        CHECK(re[0] == doctest::Approx(-1.0));
        CHECK(re[1] == doctest::Approx(-1.0));
        CHECK(re[2] == doctest::Approx(1.0));
        CHECK(re[3] == doctest::Approx(1.0));
    }
}

TEST_SUITE("bdg") {
    TEST_CASE("matrix entries") {
        auto c = upa_coefficients(coupling(6.2), 2.0, 3.0, kN);
        auto m = bdg_matrix(c);
        const double g = 2 * c.v2 * kN * c.omega * c.omega;
        const double ap = 1 + c.v1 * c.delta + g, am = -1 + c.v1 * c.delta + g;
        Eigen::Matrix4d ref;
        ref << ap, -g, g, -g,
              -g, am, -g, g,
              -g, g, -ap, g,
               g, -g, g, -am;
        CHECK((m - ref).cwiseAbs().maxCoeff() == 0.0);
        CHECK(std::abs(m.trace()) < 1e-15);
    }
    TEST_CASE("particle-hole symmetry and V2 = 0 reality") {
        for (double depth : {5.8, 6.0, 6.2, 7.0})
            for (double beta : {0.0, 0.5, 3.0}) {
                auto s = classify_stability(bdg_matrix(upa_coefficients(coupling(depth), 2.0, beta, kN)));
                for (int i = 0; i < 4; ++i) CHECK(has_partner(s.eigenvalues, -std::conj(s.eigenvalues[i]), 1e-10));
                if (beta == 0.0) CHECK_FALSE(s.amplifying);
            }
    }
    TEST_CASE("normal at 5.8 E_R, amplifying at 6.2 E_R") {
        auto n = classify_stability(bdg_matrix(upa_coefficients(coupling(5.8), 2.0, 3.0, kN)));
        auto a = classify_stability(bdg_matrix(upa_coefficients(coupling(6.2), 2.0, 3.0, kN)));
        CHECK_FALSE(n.amplifying);
        CHECK(a.amplifying);
        CHECK(a.growth_rate > 0.0);
    }
    TEST_CASE("classification changes only where real eigenvalues collide") {
        double lo = 5.8, hi = 6.2;
        auto amp = [](double d) {
            auto j = build_lattice_model(rb(d), -3, 3).coupling;
            return classify_stability(bdg_matrix(upa_coefficients(j, 2.0, 3.0, kN)));
        };
        REQUIRE_FALSE(amp(lo).amplifying);
        REQUIRE(amp(hi).amplifying);
        for (int it = 0; it < 44; ++it) {
            const double mid = 0.5 * (lo + hi);
            (amp(mid).amplifying ? hi : lo) = mid;
        }
        auto s = amp(lo);
        double gap = 1e9;
        for (int i = 0; i < 4; ++i)
            for (int k = i + 1; k < 4; ++k) gap = std::min(gap, std::abs(s.eigenvalues[i] - s.eigenvalues[k]));
        CHECK(gap < 1e-6);
    }
}

TEST_SUITE("upa evolution") {
    TEST_CASE("symplectic metric is preserved") {
        for (double depth : {5.8, 6.2}) {
            auto e = evolve_upa(upa_coefficients(coupling(depth), 2.0, 3.0, kN), 40.0);
            CHECK(e.max_symplectic_error < 1e-8);
        }
    }
    TEST_CASE("normal regime stays bounded") {
        auto e = evolve_upa(upa_coefficients(coupling(5.8), 2.0, 3.0, kN), 40.0);
        CHECK(*std::max_element(e.rho_plus.begin(), e.rho_plus.end()) < 0.05 * kN);
        CHECK(std::isinf(e.breakdown_time));
    }
    TEST_CASE("growth follows twice the imaginary part") {
        auto c = upa_coefficients(coupling(6.2), 2.0, 3.0, kN);
        auto s = classify_stability(bdg_matrix(c));
        // linear propagation run well past breakdown so the driven transient has died out
        auto e = evolve_upa(c, 80.0);
        const double fit = fitted_growth_rate(e, 40.0, 80.0);
        CHECK(std::abs(fit / (2 * s.growth_rate) - 1) < 0.05);
    }
    TEST_CASE("agrees with mean-field in the normal regime") {
        const auto& j = coupling(5.8);
        auto e = evolve_upa(upa_coefficients(j, 2.0, 3.0, kN), 10.0);
        auto mf = evolve_atom_only(MeanFieldState::localized(-8, 8, 0), j, 2.0, 3.0, 10.0);
        REQUIRE(e.times.size() == mf.times.size());
        double d = 0.0;
        for (std::size_t k = 0; k < e.times.size(); ++k) d = std::max(d, std::abs(e.n_eff[k] - mf.signal[k]));
        CHECK(d < 0.02);
    }
    TEST_CASE("short-time side-mode populations match mean-field" * doctest::should_fail()) {
        // The quadratic model drops J_{1,-1} and symmetrizes Delta_{+-1}; the mean field then
        // puts far fewer atoms in phi_{-1} than the UPA does.
        const auto& j = coupling(6.2);
        auto e = evolve_upa(upa_coefficients(j, 2.0, 3.0, kN), 10.0);
        auto mf = evolve_atom_only(MeanFieldState::localized(-8, 8, 0), j, 2.0, 3.0, 10.0);
        int compared = 0;
        for (std::size_t k = 8; k < e.times.size(); ++k) {
            const double p = mf.populations[k][9], m = mf.populations[k][7];
            if (p > 0.05 || m > 0.05) break;
            if (p * kN < 10.0) continue;  // vacuum noise is not part of the mean field
            CHECK(std::abs(e.rho_plus[k] / (p * kN) - 1) < 0.1);
            CHECK(std::abs(e.rho_minus[k] / (m * kN) - 1) < 0.1);
            ++compared;
        }
        CHECK(compared > 10);
    }
}

TEST_SUITE("amplification scan") {
    TEST_CASE("boundaries") {
        AmplificationOptions o;
        o.adip_stride = 0;
        o.threads = 4;
        std::vector<double> depth, beta{1.0, 2.0, 3.0};
        for (double d = 5.6; d <= 7.5 + 1e-9; d += 0.1) depth.push_back(d);
        auto map = amplification_scan(rb(6.0), 2.0, depth, beta, kN, o);
        REQUIRE(map.boundary.size() == 3);
        for (const auto& b : map.boundary) {
            CHECK(std::abs(b.left - 6.0) <= 0.25);
            CHECK(b.right > b.left);
        }
        CHECK(map.boundary[0].right < map.boundary[1].right);
        CHECK(map.boundary[1].right < map.boundary[2].right);
        for (const auto& c : map.cells) CHECK(c.error.empty());
    }
    TEST_CASE("A_dip overlay separates the regions") {
        AmplificationOptions o;
        o.adip_stride = 1;
        o.n_min = -8;
        o.n_max = 8;
        o.threads = 4;
        o.refine_boundary = false;
        auto map = amplification_scan(rb(6.0), 2.0, {5.8, 6.2, 6.3}, {3.0}, kN, o);
        for (const auto& c : map.cells) {
            REQUIRE(c.a_dip >= 0.0);
            if (c.amplifying) CHECK(c.a_dip > 0.05);
            else CHECK(c.a_dip < 0.05);
        }
    }
}
