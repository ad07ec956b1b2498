#include <chrono>
#include <cmath>
#include <fstream>
#include <map>

#include "wscav/dpt.hpp"
#include "wscav/ed.hpp"
#include "wscav/error.hpp"
#include "wscav/experimental.hpp"
#include "wscav/io.hpp"
#include "wscav/parallel.hpp"
#include "wscav/upa.hpp"

namespace wscav {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

using Cell = CsvWriter::Cell;

// Benchmark drive used by ed-benchmark when the config gives none (omega_B units).
CavityDrive benchmark_drive() {
    CavityDrive d;
    d.detuning_c = -400.0;
    d.pump = 40.0;
    d.coupling_sq_over_det = 100.0;
    return d;
}

struct Context {
    const RunConfig& cfg;
    const RunOptions& opt;
    LatticeSpec spec;
    LatticeOptions lopt;
    Sampling sampling;
    json summary = json::object();
    std::vector<std::string> warnings;
    json cell_errors = json::array();
    std::vector<PayloadFile> payload;
    std::size_t cells = 0;

    void write(const std::string& name, const CsvWriter& csv) {
        const fs::path p = opt.out_dir / name;
        std::ofstream out(p, std::ios::binary);
        if (!out) throw ConfigError("cannot write " + p.string());
        out << csv.text();
        out.close();
        payload.push_back({name, sha256_hex(csv.text()), csv.rows()});
    }
    void warn(const std::vector<std::string>& w) { warnings.insert(warnings.end(), w.begin(), w.end()); }

    // V and beta either given directly or derived from the raw drive.
    std::pair<double, double> v_beta(bool required, double v_default = 0.0, double beta_default = 0.0) const {
        const auto& m = cfg.model;
        if (m.drive) {
            const CavityDrive d = m.drive->in_bloch_units(spec.bloch_frequency());
            return {d.v(), d.beta(m.n_atoms)};
        }
        if (required && (!m.v || !m.beta)) throw ConfigError("config: this command needs model.v and model.beta (or model.drive)");
        return {m.v.value_or(v_default), m.beta.value_or(beta_default)};
    }
    CavityDrive drive() const {
        if (!cfg.model.drive) throw ConfigError("config: atom-cavity dynamics need model.drive");
        return cfg.model.drive->in_bloch_units(spec.bloch_frequency());
    }
};

std::vector<std::string> population_header(int n_min, int n_max, const std::string& prefix) {
    std::vector<std::string> h;
    for (int n = n_min; n <= n_max; ++n) h.push_back(prefix + std::to_string(n));
    return h;
}

void trajectory_csv(Context& ctx, const std::string& name, const Trajectory& t) {
    std::vector<std::string> h{"time_tb", "n_eff"};
    const int n_max = t.n_min + static_cast<int>(t.populations.front().size()) - 1;
    for (auto& s : population_header(t.n_min, n_max, "rho_")) h.push_back(s);
    const bool photons = !t.photon_number.empty();
    if (photons) h.push_back("photon_number");
    CsvWriter csv(h);
    for (std::size_t i = 0; i < t.times.size(); ++i) {
        std::vector<Cell> r{t.times[i], t.signal[i]};
        for (Eigen::Index k = 0; k < t.populations[i].size(); ++k) r.emplace_back(t.populations[i][k]);
        if (photons) r.emplace_back(t.photon_number[i]);
        csv.row(r);
    }
    ctx.write(name, csv);
}

json stats_json(const IntegratorStats& s) {
    return {{"steps", s.steps}, {"rejected", s.rejected}, {"rhs_evals", s.rhs_evals},
            {"max_norm_drift", s.max_norm_drift}, {"max_energy_drift", s.max_energy_drift}};
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

void run_bands(Context& ctx) {
    const auto c = ctx.cfg.bands.value_or(BandsConfig{});
    const auto bs = compute_band_structure(ctx.spec.depth_v0, ctx.cfg.numerics.n_bands, c.n_q);
    CsvWriter csv({"band", "q", "energy_er"});
    for (int b = 0; b < bs.n_bands; ++b)
        for (std::size_t k = 0; k < bs.quasimomenta.size(); ++k)
            csv.row({static_cast<long long>(b), bs.quasimomenta[k], bs.energies(b, k)});
    ctx.write("bands.csv", csv);
    json gaps = json::array();
    for (int b = 0; b + 1 < bs.n_bands; ++b) gaps.push_back(min_band_gap(bs, b));
    const double eb = ctx.spec.bloch_energy_in_recoil();
    ctx.summary = {{"depth_v0", bs.depth_v0}, {"tunneling_j0_er", tunneling_rate(bs)}, {"min_gaps_er", gaps},
                   {"bloch_energy_er", eb}, {"ground_gap_bloch_units", bs.n_bands > 1 ? min_band_gap(bs, 0) / eb : 0.0}};
}

void run_wannier(Context& ctx) {
    const auto c = ctx.cfg.wannier.value_or(WannierConfig{});
    const auto m = build_lattice_model(ctx.spec, ctx.cfg.sites.n_min, ctx.cfg.sites.n_max, ctx.lopt);
    std::vector<double> grid, values;
    m.wannier->sample(c.half_width_sites, c.points_per_site, grid, values);
    std::vector<std::string> h{"x", "wannier"};  // x = k_l z
    for (auto& s : population_header(m.basis.n_min, m.basis.n_max, "phi_")) h.push_back(s);
    CsvWriter csv(h);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        std::vector<Cell> r{grid[i], values[i]};
        for (int n = m.basis.n_min; n <= m.basis.n_max; ++n) r.emplace_back(m.basis.phi(n, grid[i]));
        csv.row(r);
    }
    ctx.write("wannier.csv", csv);
    CsvWriter coef({"n", "a", "coefficient"});
    for (int n = m.basis.n_min; n <= m.basis.n_max; ++n)
        for (int a = m.basis.a_min; a <= m.basis.a_max; ++a)
            coef.row({static_cast<long long>(n), static_cast<long long>(a),
                      m.basis.coefficients(a - m.basis.a_min, n - m.basis.n_min)});
    ctx.write("ws_coefficients.csv", coef);
    ctx.summary = {{"tunneling_j0_er", m.j0}, {"bessel_argument", m.basis.bessel_argument},
                   {"wannier_sites", {m.basis.a_min, m.basis.a_max}}};
}

void run_couplings(Context& ctx) {
    const auto m = build_lattice_model(ctx.spec, ctx.cfg.sites.n_min, ctx.cfg.sites.n_max, ctx.lopt);
    const auto& j = m.coupling;
    CsvWriter csv({"row", "col", "value"});
    for (int a = j.n_min; a <= j.n_max; ++a)
        for (int b = j.n_min; b <= j.n_max; ++b) csv.row({static_cast<long long>(a), static_cast<long long>(b), j(a, b)});
    ctx.write("couplings.csv", csv);
    ctx.summary = {{"error_bound", j.error_bound}, {"wavenumber_ratio", j.wavenumber_ratio}, {"cavity_phase", j.cavity_phase}};
    if (j.contains(-1) && j.contains(0)) {
        ctx.summary["delta_m1"] = j.delta(-1);
        ctx.summary["omega_m1"] = j.omega(-1);
        ctx.summary["omega_bar"] = j.omega_bar();
    }
}

void run_magic(Context& ctx) {
    const auto c = ctx.cfg.magic_depth.value_or(MagicConfig{});
    const auto r = find_magic_depth(ctx.spec, c.lo, c.hi, c.step, ctx.lopt);
    CsvWriter csv({"depth_er", "spread"});
    for (auto [d, s] : r.scan) csv.row({d, s});
    ctx.write("magic_scan.csv", csv);
    ctx.summary = {{"magic_depth_er", r.depth}, {"spread", r.spread}, {"boundary_hit", r.boundary_hit}};
    if (r.boundary_hit) ctx.warnings.push_back("magic depth minimum sits on the scan boundary");
}

void run_quench(Context& ctx) {
    const auto c = ctx.cfg.quench.value_or(QuenchConfig{});
    const auto& s = ctx.cfg.sites;
    const auto q = prepare_quench_state(ctx.spec, c.deep, c.shallow, c.site, s.n_min, s.n_max, ctx.lopt);
    ctx.warn(q.warnings);
    const auto m = build_lattice_model(ctx.spec.with_depth(c.shallow), s.n_min, s.n_max, ctx.lopt);
    const auto [v, beta] = ctx.v_beta(false);
    Trajectory t;
    if (ctx.cfg.model.dynamics == "atom-cavity") {
        AtomCavityOptions ao;
        ao.sampling = ctx.sampling;
        t = evolve_atom_cavity(q.state, m.coupling, ctx.drive(), ctx.cfg.model.n_atoms, c.horizon, ao);
    } else {
        t = evolve_atom_only(q.state, m.coupling, v, beta, c.horizon, ctx.sampling);
    }
    trajectory_csv(ctx, "trajectory.csv", t);
    ctx.summary = {{"ground_band_fraction", q.ground_band_fraction}, {"v", v}, {"beta", beta}, {"stats", stats_json(t.stats)}};
    if (c.horizon >= 10.0) {
        const auto peak = bo_spectrum(t);
        ctx.summary["peak_frequency_bloch_units"] = peak.found ? json(peak.frequency) : json(nullptr);
        ctx.summary["peak_resolution"] = peak.resolution;
    }
}

void run_modulate(Context& ctx) {
    const auto c = ctx.cfg.modulate.value_or(ModulateConfig{});
    const auto& s = ctx.cfg.sites;
    const auto m = build_lattice_model(ctx.spec, s.n_min, s.n_max, ctx.lopt);
    const auto mr = prepare_modulated_state(m, c.v1, c.omega, c.phase, c.duration);
    ctx.warn(mr.warnings);
    const auto [v, beta] = ctx.v_beta(false);
    const auto t = evolve_atom_only(mr.state, m.coupling, v, beta, c.horizon, ctx.sampling);
    trajectory_csv(ctx, "trajectory.csv", t);
    ctx.summary = {{"sideband", mr.sideband}, {"coupling_bloch_units", mr.coupling}, {"detuning_bloch_units", mr.detuning},
                   {"v", v}, {"beta", beta}, {"stats", stats_json(t.stats)}};
}

void run_evolve(Context& ctx) {
    const auto c = ctx.cfg.evolve.value_or(EvolveConfig{});
    const auto& s = ctx.cfg.sites;
    const auto m = build_lattice_model(ctx.spec, s.n_min, s.n_max, ctx.lopt);
    const auto init = MeanFieldState::localized(s.n_min, s.n_max, c.site);
    Trajectory t;
    if (ctx.cfg.model.dynamics == "atom-cavity") {
        AtomCavityOptions ao;
        ao.sampling = ctx.sampling;
        t = evolve_atom_cavity(init, m.coupling, ctx.drive(), ctx.cfg.model.n_atoms, c.horizon, ao);
    } else {
        const auto [v, beta] = ctx.v_beta(true);
        t = evolve_atom_only(init, m.coupling, v, beta, c.horizon, ctx.sampling);
        ctx.summary["v"] = v;
        ctx.summary["beta"] = beta;
    }
    trajectory_csv(ctx, "trajectory.csv", t);
    ctx.summary["a_dip"] = a_dip(t, std::min(40.0, c.horizon));
    ctx.summary["stats"] = stats_json(t.stats);
}

void run_dpt_trajectory(Context& ctx) {
    const auto c = ctx.cfg.dpt.value_or(DptConfig{});
    if (c.root_interval != "geometric" && c.root_interval != "supplement")
        throw ConfigError("config: dpt.root_interval must be 'geometric' or 'supplement'");
    const auto [v, beta] = ctx.v_beta(true);
    const auto m = build_lattice_model(ctx.spec, std::min(ctx.cfg.sites.n_min, -1), std::max(ctx.cfg.sites.n_max, 0), ctx.lopt);
    const auto p = TwoModeParams::from_coupling(m.coupling);
    const auto cls = classify_phase(p, v, beta);
    const auto pot = effective_potential(p, v, beta,
                                         c.root_interval == "supplement" ? RootInterval::Supplement : RootInterval::Geometric);
    const auto tr = evolve_spin(p, v, beta, SpinState{}, c.horizon, ctx.sampling);
    std::optional<SpinTrajectory> lmg;
    if (c.lmg) lmg = evolve_lmg(lmg_params(p, v, beta, ctx.cfg.model.n_atoms), SpinState{}, c.horizon, ctx.sampling);
    std::vector<std::string> h{"time_tb", "sx", "sy", "sz", "n_eff"};
    if (lmg) for (const char* k : {"lmg_sx", "lmg_sy", "lmg_sz"}) h.push_back(k);
    CsvWriter csv(h);
    double max_sz = -1.0, lmg_dev = 0.0;
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        const auto& s = tr.s[i];
        std::vector<Cell> r{tr.times[i], s.sx, s.sy, s.sz, tr.n_eff[i]};
        max_sz = std::max(max_sz, s.sz);
        if (lmg) {
            const auto& l = lmg->s[i];
            r.emplace_back(l.sx);
            r.emplace_back(l.sy);
            r.emplace_back(l.sz);
            lmg_dev = std::max(lmg_dev, std::abs(l.sz - s.sz));
        }
        csv.row(r);
    }
    ctx.write("spin.csv", csv);
    ctx.summary = {{"v", v}, {"beta", beta}, {"delta", p.delta}, {"omega_x", p.omega_x}, {"omega_bar", p.omega_bar},
                   {"label", to_string(cls.label)}, {"root_count", cls.root_count}, {"roots", pot.roots},
                   {"turning_point", cls.turning_point}, {"beta_critical", cls.beta_critical},
                   {"root_interval", c.root_interval}, {"max_sz", max_sz},
                   {"max_length_drift", tr.max_length_drift}, {"max_energy_drift", tr.max_energy_drift}};
    if (lmg) ctx.summary["lmg_max_sz_deviation"] = lmg_dev;
}

void run_phase_diagram(Context& ctx) {
    const auto c = ctx.cfg.phase_diagram.value_or(PhaseDiagramConfig{});
    const auto m = build_lattice_model(ctx.spec, std::min(ctx.cfg.sites.n_min, -1), std::max(ctx.cfg.sites.n_max, 0), ctx.lopt);
    const auto p = TwoModeParams::from_coupling(m.coupling);
    const auto d = phase_diagram(p, c.v.expand(), c.beta.expand(), c.horizon, ctx.opt.threads);
    CsvWriter csv({"v", "beta", "order_parameter", "half_window_change", "root_count", "label", "max_n_eff", "error"});
    std::map<std::string, int> counts;
    for (const auto& cell : d.cells) {
        csv.row({cell.v, cell.beta, cell.order_parameter, cell.half_window_change, static_cast<long long>(cell.root_count),
                 cell.error.empty() ? to_string(cell.label) : std::string("error"), cell.max_n_eff, cell.error});
        if (!cell.error.empty()) ctx.cell_errors.push_back({{"v", cell.v}, {"beta", cell.beta}, {"error", cell.error}});
        else ++counts[to_string(cell.label)];
    }
    ctx.cells = d.cells.size();
    ctx.write("phase_diagram.csv", csv);
    ctx.summary = {{"beta_critical", d.beta_critical}, {"label_counts", counts}, {"cells", d.cells.size()}};
}

void run_amplify(Context& ctx) {
    const auto c = ctx.cfg.amplify.value_or(AmplifyConfig{});
    if (ctx.cfg.model.drive) throw ConfigError("config: amplify-scan takes model.v with a beta grid, not a drive");
    if (!ctx.cfg.model.v) throw ConfigError("config: amplify-scan needs model.v");
    AmplificationOptions ao;
    ao.n_min = std::min(ctx.cfg.sites.n_min, -1);
    ao.n_max = std::max(ctx.cfg.sites.n_max, 1);
    ao.adip_stride = c.adip_stride;
    ao.adip_window = c.adip_window;
    ao.refine_boundary = c.refine_boundary;
    ao.threads = ctx.opt.threads;
    ao.lattice = ctx.lopt;
    const auto map = amplification_scan(ctx.spec, *ctx.cfg.model.v, c.depth.expand(), c.beta.expand(), ctx.cfg.model.n_atoms, ao);
    CsvWriter csv({"depth_er", "beta", "amplifying", "growth_rate", "a_dip", "error"});
    std::size_t amplifying = 0;
    for (const auto& cell : map.cells) {
        csv.row({cell.depth, cell.beta, static_cast<long long>(cell.amplifying), cell.growth_rate,
                 cell.a_dip >= 0.0 ? CsvWriter::format(cell.a_dip) : std::string(""), cell.error});
        if (!cell.error.empty()) ctx.cell_errors.push_back({{"depth", cell.depth}, {"beta", cell.beta}, {"error", cell.error}});
        amplifying += cell.amplifying;
    }
    ctx.cells = map.cells.size();
    ctx.write("amplification.csv", csv);
    CsvWriter b({"beta", "left_er", "right_er", "right_beyond_grid"});
    json bj = json::array();
    for (const auto& bp : map.boundary) {
        b.row({bp.beta, bp.left, bp.right, static_cast<long long>(bp.right_beyond_grid)});
        bj.push_back({{"beta", bp.beta}, {"left", number_or_null(bp.left)}, {"right", number_or_null(bp.right)},
                      {"right_beyond_grid", bp.right_beyond_grid}});
    }
    ctx.write("boundary.csv", b);
    ctx.summary = {{"v", map.v}, {"n_atoms", map.n_atoms}, {"amplifying_cells", amplifying}, {"boundary", bj}};
}

struct EdDepthResult {
    EdTrajectory cavity, atom_only;
    Trajectory meanfield;
    double max_model_gap = 0.0;  // atoms
    double max_mf_gap_5 = 0.0, max_mf_gap = 0.0;
};

void run_ed(Context& ctx) {
    const auto c = ctx.cfg.ed.value_or(EdConfig{});
    if (c.n_modes < 1 || c.initial_site < c.first_site || c.initial_site >= c.first_site + c.n_modes)
        throw ConfigError("config: ed.initial_site must lie inside the mode range");
    const CavityDrive drive = ctx.cfg.model.drive ? ctx.drive() : benchmark_drive();
    const double n = c.n_atoms;
    const double v = drive.v(), beta = drive.beta(n);
    const int last = c.first_site + c.n_modes - 1;
    const auto fa = build_fock_basis(c.n_atoms, c.n_modes, std::nullopt, c.first_site);
    const auto fc = build_fock_basis(c.n_atoms, c.n_modes, c.photon_cutoff, c.first_site);
    std::vector<int> occ(c.n_modes, 0);
    occ[c.initial_site - c.first_site] = c.n_atoms;

    const auto results = parallel_map<EdDepthResult>(c.depths.size(), ctx.opt.threads, [&](std::size_t i) {
        const auto m = build_lattice_model(ctx.spec.with_depth(c.depths[i]), c.first_site, last, ctx.lopt);
        EdDepthResult r;
        r.cavity = evolve_ed(fc, build_atom_cavity_h(fc, m.coupling, drive), dressed_state(fc, m.coupling, drive, occ),
                             c.horizon, ctx.sampling.dt);
        r.atom_only = evolve_ed(fa, build_atom_only_h(fa, m.coupling, v, beta, n), fock_state(fa, occ), c.horizon,
                                ctx.sampling.dt);
        r.meanfield = evolve_atom_only(MeanFieldState::localized(c.first_site, last, c.initial_site), m.coupling, v, beta,
                                       c.horizon, ctx.sampling);
        for (std::size_t k = 0; k < r.atom_only.times.size(); ++k) {
            r.max_model_gap = std::max(r.max_model_gap, (r.cavity.populations[k] - r.atom_only.populations[k]).cwiseAbs().maxCoeff());
            const double g = (r.atom_only.populations[k] / n - r.meanfield.populations[k]).cwiseAbs().maxCoeff();
            r.max_mf_gap = std::max(r.max_mf_gap, g);
            if (r.atom_only.times[k] <= 5.0 + 1e-12) r.max_mf_gap_5 = std::max(r.max_mf_gap_5, g);
        }
        return r;
    });

    std::vector<std::string> h{"depth_er", "time_tb"};
    for (int s = c.first_site; s <= last; ++s)
        for (const char* k : {"ed_cavity_", "ed_atom_only_", "meanfield_"}) h.push_back(std::string(k) + "rho_" + std::to_string(s));
    h.push_back("ed_cavity_photons");
    CsvWriter csv(h);
    json per_depth = json::array();
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (!results[i].value) {
            ctx.cell_errors.push_back({{"depth", c.depths[i]}, {"error", results[i].error}});
            continue;
        }
        const auto& r = *results[i].value;
        for (std::size_t k = 0; k < r.atom_only.times.size(); ++k) {
            std::vector<Cell> row{c.depths[i], r.atom_only.times[k]};
            for (int m = 0; m < c.n_modes; ++m) {
                row.emplace_back(r.cavity.populations[k][m] / n);
                row.emplace_back(r.atom_only.populations[k][m] / n);
                row.emplace_back(r.meanfield.populations[k][m]);
            }
            row.emplace_back(r.cavity.photon_number[k]);
            csv.row(row);
        }
        ctx.warn(r.cavity.warnings);
        per_depth.push_back({{"depth", c.depths[i]}, {"max_cavity_vs_atom_only_atoms", r.max_model_gap},
                             {"max_meanfield_vs_ed_rho_5tb", r.max_mf_gap_5}, {"max_meanfield_vs_ed_rho", r.max_mf_gap},
                             {"top_photon_population", r.cavity.top_photon_population},
                             {"norm_drift", std::max(r.cavity.max_norm_drift, r.atom_only.max_norm_drift)}});
    }
    ctx.cells = c.depths.size();
    ctx.write("ed_benchmark.csv", csv);
    ctx.summary = {{"v", v}, {"beta", beta}, {"dimension_cavity", fc.dim()}, {"dimension_atom_only", fa.dim()},
                   {"depths", per_depth}};
}

void run_feasibility(Context& ctx) {
    const auto c = ctx.cfg.feasibility.value_or(FeasibilityConfig{});
    const auto [v, beta] = ctx.v_beta(false, 2.0, 1.0);
    const double wb = bloch_frequency(ctx.spec);
    const auto rates = decoherence_rates(v, beta, c.kappa_over_dc, c.gamma_over_d0);
    CsvWriter rad({"temperature_k", "delta_j0_er", "delta_j0_classical_er", "delta_j00", "relative_delta_j00",
                   "relative_delta_j00_classical"});
    json table = json::array();
    for (double t : c.temperatures) {
        RadialNoiseSpec ns{2.0 * constants::pi * c.trap_freq_hz, t, c.beam_width, ctx.spec.depth_v0};
        const auto r = radial_j0_std(ns, ctx.spec, ctx.lopt.ws, ctx.lopt.quad);
        const double rel_cl = r.delta_j00_classical / std::abs(r.j00);
        rad.row({t, r.delta_j0, r.delta_j0_classical, r.delta_j00, r.relative_delta_j00, rel_cl});
        table.push_back({{"temperature_k", t}, {"delta_j0_er", r.delta_j0}, {"relative_delta_j00", r.relative_delta_j00},
                         {"relative_delta_j00_classical", rel_cl}});
    }
    ctx.write("radial_noise.csv", rad);
    LoadingSpec ls{c.epsilon, c.lattice_length, ctx.cfg.seed, c.subsample};
    const auto load = loading_error_std(ls, ctx.spec, ctx.lopt);
    CsvWriter lc({"site", "j00"});
    for (std::size_t i = 0; i < load.loaded_sites.size(); ++i) lc.row({static_cast<long long>(load.loaded_sites[i]), load.j00[i]});
    ctx.write("loading.csv", lc);
    ctx.summary = {
        {"bloch_frequency_hz", wb / (2.0 * constants::pi)},
        {"recoil_energy_hz", ctx.spec.recoil_energy() / (2.0 * constants::pi * constants::hbar)},
        {"v", v}, {"beta", beta},
        {"rates", {{"dephasing", rates.dephasing}, {"scattering", rates.scattering},
                   {"dephasing_per_50_periods", rates.dephasing_budget}, {"scattering_per_50_periods", rates.scattering_budget}}},
        {"cooperativity", cooperativity(c.g0_hz, c.kappa_hz, c.gamma_hz)},
        {"radial_noise", table},
        {"loading", {{"epsilon", c.epsilon}, {"candidate_sites", load.candidate_sites},
                     {"loaded_sites", load.loaded_sites.size()}, {"mean_j00", load.mean}, {"std_j00", load.std_dev}}}};
}

void run_validate(Context& ctx) {
    const auto rep = validate_config(ctx.cfg);
    ctx.warn(rep.warnings);
    ctx.summary = rep.derived;
}

}  // namespace

ValidationReport validate_config(const RunConfig& c) {
    ValidationReport r;
    const LatticeSpec spec = c.lattice.resolve();
    const double wb = spec.bloch_frequency();
    r.derived["bloch_frequency_hz"] = wb / (2.0 * constants::pi);
    r.derived["bloch_energy_er"] = spec.bloch_energy_in_recoil();
    r.derived["wavenumber_ratio"] = spec.wavenumber_ratio();
    if (spec.depth_v0 < 2.0)
        r.warnings.push_back("lattice depth below 2 E_R: the ground-band tight-binding picture behind the WS states is questionable");
    try {
        const auto bs = compute_band_structure(spec.depth_v0, std::max(2, c.numerics.n_bands), c.numerics.n_q);
        const double j0 = tunneling_rate(bs);
        r.derived["tunneling_j0_er"] = j0;
        r.derived["bessel_argument"] = 2.0 * j0 / spec.bloch_energy_in_recoil();
    } catch (const std::exception& e) {
        r.warnings.push_back(std::string("band structure failed: ") + e.what());
    }
    std::optional<double> v = c.model.v, beta = c.model.beta;
    if (c.model.drive) {
        const auto d = c.model.drive->in_bloch_units(wb);
        v = d.v();
        beta = d.beta(c.model.n_atoms);
        r.derived["detuning_c_bloch_units"] = d.detuning_c;
        const bool adiabatic = c.model.dynamics == "atom-cavity" || c.command == "ed-benchmark";
        if (adiabatic && std::abs(d.detuning_c) < 10.0)
            r.warnings.push_back("|Delta_c| is not much larger than omega_B: adiabatic elimination of the cavity is doubtful");
    }
    if (v) r.derived["v_bloch_units"] = *v;
    if (beta) {
        r.derived["beta"] = *beta;
        if (!(*beta > 0.0)) r.warnings.push_back("beta <= 0: the dispersive shift can cross the cavity resonance");
    }
    return r;
}

RunResult run(const RunConfig& config, const RunOptions& opt) {
    if (config.command.empty()) throw ConfigError("config: no command given");
    const auto t0 = std::chrono::steady_clock::now();
    std::error_code ec;
    fs::create_directories(opt.out_dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + opt.out_dir.string());

    Context ctx{config, opt, config.lattice.resolve(), config.numerics.lattice_options(), config.numerics.sampling()};
    static const std::map<std::string, void (*)(Context&)> table = {
        {"bands", run_bands}, {"wannier", run_wannier}, {"couplings", run_couplings}, {"magic-depth", run_magic},
        {"bo-quench", run_quench}, {"bo-modulate", run_modulate}, {"evolve", run_evolve},
        {"dpt-trajectory", run_dpt_trajectory}, {"dpt-phase-diagram", run_phase_diagram},
        {"amplify-scan", run_amplify}, {"ed-benchmark", run_ed}, {"feasibility", run_feasibility},
        {"validate", run_validate}};
    auto it = table.find(config.command);
    if (it == table.end()) throw ConfigError("unknown command '" + config.command + "'");
    it->second(ctx);

    RunResult res;
    res.total_failure = ctx.cells > 0 && ctx.cell_errors.size() == ctx.cells;
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json payload = json::array();
    for (const auto& p : ctx.payload) payload.push_back({{"file", p.file}, {"sha256", p.sha256}, {"rows", p.rows}});
    res.envelope = {{"envelope_version", 1},
                    {"tool", "wscav"},
                    {"tool_version", kToolVersion},
                    {"command", config.command},
                    {"config_sha256", config_hash(config)},
                    {"config", config_to_json(config)},
                    {"wall_time_s", wall},
                    {"threads", opt.threads},
                    {"payload", payload},
                    {"summary", ctx.summary},
                    {"warnings", ctx.warnings},
                    {"cell_errors", ctx.cell_errors}};
    std::ofstream out(opt.out_dir / "result.json", std::ios::binary);
    if (!out) throw ConfigError("cannot write result.json");
    out << res.envelope.dump(2) << "\n";
    res.payload = ctx.payload;
    res.warnings = ctx.warnings;
    return res;
}

VerifyReport verify_envelope(const fs::path& p) {
    VerifyReport rep;
    const fs::path file = fs::is_directory(p) ? p / "result.json" : p;
    auto fail = [&](const std::string& s) {
        rep.ok = false;
        rep.problems.push_back(s);
    };
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        fail("cannot open " + file.string());
        return rep;
    }
    json env;
    try {
        env = json::parse(in);
    } catch (const std::exception& e) {
        fail(std::string("result.json is not valid JSON: ") + e.what());
        return rep;
    }
    try {
        const RunConfig cfg = config_from_json(env.at("config"));
        if (config_hash(cfg) != env.at("config_sha256").get<std::string>()) fail("config hash does not match the embedded config");
    } catch (const std::exception& e) {
        fail(std::string("embedded config invalid: ") + e.what());
    }
    if (!env.contains("payload") || !env["payload"].is_array()) {
        fail("envelope has no payload list");
        return rep;
    }
    for (const auto& item : env["payload"]) {
        const fs::path f = file.parent_path() / item.value("file", std::string());
        if (!fs::exists(f)) {
            fail("missing payload file " + f.string());
            continue;
        }
        if (sha256_file(f) != item.value("sha256", std::string())) fail("hash mismatch for " + f.string());
    }
    return rep;
}

}  // namespace wscav
