#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "wscav/lattice.hpp"
#include "wscav/meanfield.hpp"
#include "wscav/units.hpp"

namespace wscav {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

/// Either an explicit list or an inclusive arithmetic range.
struct GridSpec {
    std::optional<double> start, stop, step;
    std::vector<double> values;

    static GridSpec range(double start, double stop, double step);
    static GridSpec list(std::vector<double> v);
    std::vector<double> expand() const;  // throws ConfigError when empty or malformed
};

struct LatticeConfig {
    std::string species = "Rb87";
    std::optional<double> mass_amu;
    std::optional<double> lambda_l;  // m
    std::optional<double> lambda_c;  // m
    double depth_v0 = 6.0;           // E_R
    double gravity = constants::standard_gravity;
    double cavity_offset = 0.0;      // m

    template <class V> void fields(V& v) {
        v("species", species); v("mass_amu", mass_amu); v("lambda_l", lambda_l); v("lambda_c", lambda_c);
        v("depth_v0", depth_v0); v("gravity", gravity); v("cavity_offset", cavity_offset);
    }
    LatticeSpec resolve() const;
};

struct SitesConfig {
    int n_min = -5, n_max = 5;
    template <class V> void fields(V& v) { v("n_min", n_min); v("n_max", n_max); }
};

struct NumericsConfig {
    int n_bands = 3;
    int n_q = 64;
    std::string ws_method = "bessel";  // bessel | numerical
    double quad_abs_tol = 1e-10;
    double dt = 1.0 / 64.0;  // T_B
    double rtol = 1e-10, atol = 1e-12;
    template <class V> void fields(V& v) {
        v("n_bands", n_bands); v("n_q", n_q); v("ws_method", ws_method); v("quad_abs_tol", quad_abs_tol);
        v("dt", dt); v("rtol", rtol); v("atol", atol);
    }
    LatticeOptions lattice_options() const;
    Sampling sampling() const;
};

/// Raw cavity parameters; angular frequencies in rad/s or in omega_B.
struct DriveConfig {
    std::string unit = "rad/s";
    double detuning_c = 0.0;
    double linewidth = 0.0;
    double pump_re = 0.0, pump_im = 0.0;
    double coupling_sq_over_det = 0.0;
    template <class V> void fields(V& v) {
        v("unit", unit); v("detuning_c", detuning_c); v("linewidth", linewidth); v("pump_re", pump_re);
        v("pump_im", pump_im); v("coupling_sq_over_det", coupling_sq_over_det);
    }
    CavityDrive in_bloch_units(double omega_b) const;
};

struct ModelConfig {
    std::optional<double> v;     // omega_B
    std::optional<double> beta;
    double n_atoms = 1e4;
    std::optional<DriveConfig> drive;
    std::string dynamics = "atom-only";  // atom-only | atom-cavity
    template <class V> void fields(V& v_) {
        v_("v", v); v_("beta", beta); v_("n_atoms", n_atoms); v_("drive", drive); v_("dynamics", dynamics);
    }
};

struct BandsConfig {
    int n_q = 64;
    template <class V> void fields(V& v) { v("n_q", n_q); }
};
struct WannierConfig {
    double half_width_sites = 6.0;
    int points_per_site = 32;
    template <class V> void fields(V& v) { v("half_width_sites", half_width_sites); v("points_per_site", points_per_site); }
};
struct MagicConfig {
    double lo = 2.0, hi = 12.0, step = 0.25;
    template <class V> void fields(V& v) { v("lo", lo); v("hi", hi); v("step", step); }
};
struct QuenchConfig {
    double deep = 15.0, shallow = 8.0;
    int site = 0;
    double horizon = 20.0;  // T_B
    template <class V> void fields(V& v) {
        v("deep", deep); v("shallow", shallow); v("site", site); v("horizon", horizon);
    }
};
struct ModulateConfig {
    double v1 = 0.5;       // E_R
    double omega = 1.0;    // omega_B
    double phase = 0.0;
    double duration = 5.0; // T_B
    double horizon = 20.0; // T_B, free evolution after the pulse
    template <class V> void fields(V& v) {
        v("v1", v1); v("omega", omega); v("phase", phase); v("duration", duration); v("horizon", horizon);
    }
};
struct EvolveConfig {
    int site = 0;
    double horizon = 40.0;
    template <class V> void fields(V& v) { v("site", site); v("horizon", horizon); }
};
struct DptConfig {
    double horizon = 50.0;
    bool lmg = true;
    std::string root_interval = "geometric";  // geometric | supplement
    template <class V> void fields(V& v) { v("horizon", horizon); v("lmg", lmg); v("root_interval", root_interval); }
};
struct PhaseDiagramConfig {
    GridSpec v = GridSpec::range(0.0, 4.0, 0.1);
    GridSpec beta = GridSpec::range(0.1, 2.0, 0.1);
    double horizon = 200.0;
    template <class V> void fields(V& v_) { v_("v", v); v_("beta", beta); v_("horizon", horizon); }
};
struct AmplifyConfig {
    GridSpec depth = GridSpec::range(5.6, 7.5, 0.1);
    GridSpec beta = GridSpec::range(0.5, 4.0, 0.5);
    int adip_stride = 4;
    double adip_window = 40.0;
    bool refine_boundary = true;
    template <class V> void fields(V& v) {
        v("depth", depth); v("beta", beta); v("adip_stride", adip_stride); v("adip_window", adip_window);
        v("refine_boundary", refine_boundary);
    }
};
struct EdConfig {
    int n_atoms = 6;
    int first_site = -1;
    int n_modes = 3;
    int photon_cutoff = 10;
    int initial_site = 0;
    double horizon = 10.0;
    std::vector<double> depths{5.8, 6.2};
    template <class V> void fields(V& v) {
        v("n_atoms", n_atoms); v("first_site", first_site); v("n_modes", n_modes); v("photon_cutoff", photon_cutoff);
        v("initial_site", initial_site); v("horizon", horizon); v("depths", depths);
    }
};
struct FeasibilityConfig {
    double trap_freq_hz = 1000.0;
    std::vector<double> temperatures{1e-7, 1e-6, 1e-5};  // K
    double beam_width = 50e-6;
    double epsilon = 0.05;
    double lattice_length = 1e-3;
    std::optional<int> subsample;
    double kappa_over_dc = 0.05, gamma_over_d0 = 0.01;
    double g0_hz = 0.3e6, kappa_hz = 0.1e6, gamma_hz = 10e6;
    template <class V> void fields(V& v) {
        v("trap_freq_hz", trap_freq_hz); v("temperatures", temperatures); v("beam_width", beam_width);
        v("epsilon", epsilon); v("lattice_length", lattice_length); v("subsample", subsample);
        v("kappa_over_dc", kappa_over_dc); v("gamma_over_d0", gamma_over_d0);
        v("g0_hz", g0_hz); v("kappa_hz", kappa_hz); v("gamma_hz", gamma_hz);
    }
};

struct RunConfig {
    int schema_version = kSchemaVersion;
    std::string command;
    std::uint64_t seed = 0;
    LatticeConfig lattice;
    SitesConfig sites;
    NumericsConfig numerics;
    ModelConfig model;
    std::optional<BandsConfig> bands;
    std::optional<WannierConfig> wannier;
    std::optional<MagicConfig> magic_depth;
    std::optional<QuenchConfig> quench;
    std::optional<ModulateConfig> modulate;
    std::optional<EvolveConfig> evolve;
    std::optional<DptConfig> dpt;
    std::optional<PhaseDiagramConfig> phase_diagram;
    std::optional<AmplifyConfig> amplify;
    std::optional<EdConfig> ed;
    std::optional<FeasibilityConfig> feasibility;

    template <class V> void fields(V& v) {
        v("schema_version", schema_version); v("command", command); v("seed", seed);
        v("lattice", lattice); v("sites", sites); v("numerics", numerics); v("model", model);
        v("bands", bands); v("wannier", wannier); v("magic_depth", magic_depth); v("quench", quench);
        v("modulate", modulate); v("evolve", evolve); v("dpt", dpt); v("phase_diagram", phase_diagram);
        v("amplify", amplify); v("ed", ed); v("feasibility", feasibility);
    }
};

const std::vector<std::string>& command_names();

RunConfig config_from_json(const nlohmann::json& j);
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const RunConfig& c);
/// Canonical text: sorted keys, two-space indent, trailing newline.
std::string canonical_config(const RunConfig& c);
std::string config_hash(const RunConfig& c);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& p);

/// RFC-4180 CSV with CRLF line ends and 12 significant digits.
class CsvWriter {
public:
    using Cell = std::variant<double, long long, std::string>;
    explicit CsvWriter(std::vector<std::string> header);
    void row(const std::vector<Cell>& cells);
    const std::string& text() const { return text_; }
    std::size_t rows() const { return rows_; }
    static std::string format(double x);
    static std::string quote(const std::string& s);

private:
    std::size_t columns_;
    std::size_t rows_ = 0;
    std::string text_;
    void line(const std::vector<std::string>& fields);
};

struct PayloadFile {
    std::string file;
    std::string sha256;
    std::size_t rows = 0;
};

struct ValidationReport {
    std::vector<std::string> warnings;
    nlohmann::json derived;
};
ValidationReport validate_config(const RunConfig& c);

struct RunOptions {
    std::filesystem::path out_dir = "out";
    unsigned threads = 1;
};

struct RunResult {
    nlohmann::json envelope;
    std::vector<PayloadFile> payload;
    std::vector<std::string> warnings;
    bool total_failure = false;
};

/// Dispatches on `config.command`, writes CSV payloads and result.json into the output directory.
RunResult run(const RunConfig& config, const RunOptions& opt);

struct VerifyReport {
    bool ok = true;
    std::vector<std::string> problems;
};
/// Accepts an envelope path or the directory holding result.json.
VerifyReport verify_envelope(const std::filesystem::path& p);

}  // namespace wscav
