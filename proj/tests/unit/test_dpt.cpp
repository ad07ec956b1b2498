#include <doctest.h>

#include <cmath>

#include "wscav/dpt.hpp"
#include "wscav/error.hpp"
#include "wscav/lattice.hpp"
#include "wscav/meanfield.hpp"

using namespace wscav;

namespace {
const LatticeModel& deep() {
    static const LatticeModel m = build_lattice_model(find_species("Rb87").lattice(20.0), -3, 3);
    return m;
}
const TwoModeParams& params() {
    static const TwoModeParams p = TwoModeParams::from_coupling(deep().coupling);
    return p;
}
}  // namespace

TEST_SUITE("two-mode") {
    TEST_CASE("parameters follow the coupling matrix") {
        const auto& j = deep().coupling;
        const auto& p = params();
        CHECK(p.delta == doctest::Approx((j(-1, -1) - j(0, 0)) / 2));
        CHECK(p.omega_x == doctest::Approx(j(-1, 0)));
        CHECK(p.omega_bar == doctest::Approx((j(-1, -1) + j(0, 0)) / 2));
        // s_z = -1 is all atoms in phi_0
        CHECK(p.n_eff(0.0, -1.0) == doctest::Approx(j(0, 0)).epsilon(1e-14));
        CHECK(p.n_eff(0.0, 1.0) == doctest::Approx(j(-1, -1)).epsilon(1e-14));
    }
    TEST_CASE("free precession") {
        SpinState s0{std::sqrt(0.75), 0.0, -0.5};
        auto tr = evolve_spin(params(), 0.0, 0.5, s0, 3.0);
        for (std::size_t k = 0; k < tr.times.size(); ++k) {
            const double ph = kTwoPi * tr.times[k];
            CHECK(tr.s[k].sz == doctest::Approx(-0.5).epsilon(1e-9));
            CHECK(std::hypot(tr.s[k].sx - s0.sx * std::cos(ph), tr.s[k].sy + s0.sx * std::sin(ph)) < 1e-8);
        }
    }
    TEST_CASE("conservation laws over 200 T_B") {
        for (double v : {1.9, 2.2}) {
            auto tr = evolve_spin(params(), v, 0.5, SpinState{}, 200.0);
            CHECK(tr.max_length_drift < 1e-8);
            CHECK(tr.max_energy_drift < 1e-6);
            CHECK(tr.max_reduction_residual < 1e-6);
            const double e0 = spin_energy(params(), v, 0.5, tr.s.front());
            for (std::size_t k = 0; k < tr.s.size(); k += 97)
                CHECK(spin_energy(params(), v, 0.5, tr.s[k]) == doctest::Approx(e0).epsilon(1e-6));
            for (std::size_t k = 0; k < tr.s.size(); k += 97)
                CHECK(tr.n_eff[k] == doctest::Approx(params().n_eff(tr.s[k].sx, tr.s[k].sz)).epsilon(1e-12));
        }
    }
    TEST_CASE("two-mode dynamics match the full mean-field model in a deep lattice") {
        const double v = 1.9, beta = 0.5;
        auto spin = evolve_spin(params(), v, beta, SpinState{}, 20.0);
        auto full = evolve_atom_only(MeanFieldState::localized(-3, 3, 0), deep().coupling, v, beta, 20.0);
        REQUIRE(spin.times.size() == full.times.size());
        double d = 0.0;
        for (std::size_t k = 0; k < spin.times.size(); ++k) {
            const double rm1 = (1 + spin.s[k].sz) / 2, r0 = (1 - spin.s[k].sz) / 2;
            d = std::max({d, std::abs(rm1 - full.populations[k][2]), std::abs(r0 - full.populations[k][3])});
        }
        CHECK(d < 0.02);
    }
}

TEST_SUITE("effective potential") {
    TEST_CASE("initial value is always a root") {
        for (double v : {0.0, 0.5, 1.9, 2.1, 4.0})
            for (double beta : {0.1, 0.5, 2.0}) {
                auto f = effective_potential(params(), v, beta);
                CHECK(f.n0 == doctest::Approx(params().omega_bar - params().delta));
                CHECK(std::abs(f(f.n0)) < 1e-12);
                bool listed = false;
                for (double r : f.roots) listed |= std::abs(r - f.n0) < 1e-10;
                CHECK(listed);
                for (double r : f.roots) CHECK(std::abs(f(r)) < 1e-9);
            }
    }
    TEST_CASE("root counts across the transition") {
        CHECK(effective_potential(params(), 1.9, 0.5).roots.size() == 2);
        CHECK(effective_potential(params(), 2.1, 0.5).roots.size() == 4);
    }
    TEST_CASE("f matches the reconstructed Bloch vector") {
        auto f = effective_potential(params(), 2.1, 0.5);
        for (double n = f.lo; n <= f.hi; n += (f.hi - f.lo) / 37) {
            const double sx = f.sx(n), sz = f.sz(n);
            CHECK(params().n_eff(sx, sz) == doctest::Approx(n).epsilon(1e-10));
            const double sy2 = 1 - sx * sx - sz * sz;
            CHECK(f(n) == doctest::Approx(-params().omega_x * params().omega_x * sy2).epsilon(1e-9));
        }
    }
    TEST_CASE("supplement interval mode") {
        // only defined when omega_x dominates delta, which a deep lattice violates
        CHECK_THROWS_AS(effective_potential(params(), 2.1, 0.5, RootInterval::Supplement), ConfigError);
        auto m = build_lattice_model(find_species("Rb87").lattice(3.0), -3, 3);
        auto p = TwoModeParams::from_coupling(m.coupling);
        REQUIRE(p.omega_x * p.omega_x >= p.delta * p.delta);
        auto g = effective_potential(p, 2.1, 0.5, RootInterval::Geometric);
        auto s = effective_potential(p, 2.1, 0.5, RootInterval::Supplement);
        CHECK(s.lo != g.lo);
        for (double r : s.roots) CHECK(std::abs(s(r)) < 1e-9);
    }
    TEST_CASE("no nonlinearity at beta = 0 handled as a limit") {
        auto f = effective_potential(params(), 1.0, 0.0);
        CHECK(f.roots.size() >= 1);
    }
}

TEST_SUITE("classification") {
    TEST_CASE("label flips between 1.9 and 2.2 at beta = 0.5") {
        const double bc = critical_beta(params()).beta;
        auto a = classify_phase(params(), 1.9, 0.5, bc), b = classify_phase(params(), 2.2, 0.5, bc);
        CHECK(a.label != b.label);
        CHECK(a.label != Phase::Crossover);
        CHECK(b.label != Phase::Crossover);
    }
    TEST_CASE("small beta never reaches four roots") {
        for (double v = 0.0; v <= 6.0; v += 0.05) CHECK(effective_potential(params(), v, 0.15).roots.size() <= 2);
        CHECK(classify_phase(params(), 2.0, 0.15).label == Phase::Crossover);
    }
    TEST_CASE("critical beta sits at the onset of four roots") {
        auto cb = critical_beta(params());
        REQUIRE(cb.found);
        CHECK(effective_potential(params(), cb.v_at, cb.beta).roots.size() == 4);
        CHECK(cb.beta > 0.1);
        CHECK(cb.beta < 0.5);
    }
    TEST_CASE("root picture agrees with trajectories on a 20x20 grid") {
        std::vector<double> vg, bg;
        for (int i = 0; i < 20; ++i) vg.push_back(0.2 + 0.2 * i);
        for (int i = 0; i < 20; ++i) bg.push_back(0.1 + 0.1 * i);
        auto pd = phase_diagram(params(), vg, bg, 20.0, 4);
        int agree = 0, total = 0;
        for (const auto& c : pd.cells) {
            REQUIRE(c.error.empty());
            auto cls = classify_phase(params(), c.v, c.beta, pd.beta_critical);
            if (cls.local_label == Phase::Boundary) continue;
            const bool crosses = c.max_n_eff > params().omega_bar;
            agree += crosses == (cls.local_label == Phase::PM);
            ++total;
        }
        CHECK(agree == total);
    }
    TEST_CASE("FM cells stay near the start") {
        auto pd = phase_diagram(params(), {0.3}, {0.5}, 200.0);
        const double n0 = params().omega_bar - params().delta;
        CHECK(pd.cells[0].label == Phase::FM);
        CHECK(std::abs(pd.cells[0].order_parameter - n0) < 0.1 * 2 * params().radius());
        CHECK(pd.cells[0].half_window_change < 0.01);
    }
    TEST_CASE("beta = 0 column has no jump, beta = 0.5 does") {
        // halving the V spacing halves the largest step of a continuous curve
        auto largest_step = [](double beta, double dv) {
            std::vector<double> vg;
            for (double v = 1.0; v <= 2.4 + 1e-9; v += dv) vg.push_back(v);
            auto pd = phase_diagram(params(), vg, {beta}, 200.0, 4);
            double s = 0.0;
            for (std::size_t i = 1; i < pd.cells.size(); ++i)
                s = std::max(s, std::abs(pd.cells[i].order_parameter - pd.cells[i - 1].order_parameter));
            return s;
        };
        CHECK(largest_step(0.0, 0.0125) < 0.75 * largest_step(0.0, 0.025));
        CHECK(largest_step(0.5, 0.0125) > 0.75 * largest_step(0.5, 0.025));
    }
    TEST_CASE("empty grid is an error") {
        CHECK_THROWS_AS(phase_diagram(params(), {}, {0.5}), ConfigError);
    }
}

TEST_SUITE("lmg") {
    TEST_CASE("rotation removes the cross term") {
        auto l = lmg_params(params(), 2.0, 0.1, 1e4);
        CHECK(std::abs(lmg_cross_coupling(params(), l.theta)) < 1e-10);
        CHECK(l.rabi * l.rabi + std::pow(params().delta / l.radius, 2) == doctest::Approx(1.0));
    }
    TEST_CASE("no cavity, no nonlinearity") {
        auto l = lmg_params(params(), 0.0, 0.5, 1e4);
        CHECK(l.chi == 0.0);
        CHECK(l.detune == doctest::Approx(params().delta / params().radius()));
    }
    TEST_CASE("small beta LMG dynamics follow the full model") {
        auto l = lmg_params(params(), 2.0, 0.1, 1e4);
        auto a = evolve_lmg(l, SpinState{}, 20.0);
        auto b = evolve_spin(params(), 2.0, 0.1, SpinState{}, 20.0);
        double d = 0.0;
        for (std::size_t k = 0; k < a.s.size(); ++k) d = std::max(d, std::abs(a.s[k].sz - b.s[k].sz));
        CHECK(d < 0.05);
    }
    TEST_CASE("degenerate rotation") {
        CHECK_THROWS_AS(lmg_params(TwoModeParams{}, 1.0, 0.1, 10.0), ConfigError);
    }
}
