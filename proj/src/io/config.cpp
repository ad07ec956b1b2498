#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

#include "wscav/error.hpp"
#include "wscav/io.hpp"

namespace wscav {

using nlohmann::json;

GridSpec GridSpec::range(double start, double stop, double step) {
    GridSpec g;
    g.start = start;
    g.stop = stop;
    g.step = step;
    return g;
}

GridSpec GridSpec::list(std::vector<double> v) {
    GridSpec g;
    g.values = std::move(v);
    return g;
}

std::vector<double> GridSpec::expand() const {
    if (!values.empty()) return values;
    if (!start || !stop || !step) throw ConfigError("grid: need either 'values' or all of start/stop/step");
    if (!(*step > 0.0) || *stop < *start) throw ConfigError("grid: need step > 0 and stop >= start");
    const double span = (*stop - *start) / *step;
    if (span > 1e6) throw ConfigError("grid: more than a million points");
    const long n = std::lround(std::floor(span + 1e-9)) + 1;
    std::vector<double> out(n);
    for (long i = 0; i < n; ++i) out[i] = *start + i * *step;
    return out;
}

LatticeSpec LatticeConfig::resolve() const {
    LatticeSpec s;
    if (!species.empty()) {
        const auto& p = find_species(species);
        s = p.lattice(depth_v0);
    }
    if (mass_amu) s.mass = *mass_amu * constants::amu;
    if (lambda_l) s.lambda_l = *lambda_l;
    if (lambda_c) s.lambda_c = *lambda_c;
    s.depth_v0 = depth_v0;
    s.gravity = gravity;
    s.cavity_offset = cavity_offset;
    s.validate();
    return s;
}

LatticeOptions NumericsConfig::lattice_options() const {
    LatticeOptions o;
    o.n_bands = n_bands;
    o.n_q = n_q;
    o.ws.method = ws_method == "numerical" ? WsMethod::NumericalDiagonalization : WsMethod::TightBindingBessel;
    o.quad.abs_tol = quad_abs_tol;
    return o;
}

Sampling NumericsConfig::sampling() const {
    Sampling s;
    s.dt = dt;
    s.ode.rtol = rtol;
    s.ode.atol = atol;
    return s;
}

CavityDrive DriveConfig::in_bloch_units(double omega_b) const {
    CavityDrive d;
    d.detuning_c = detuning_c;
    d.linewidth = linewidth;
    d.pump = {pump_re, pump_im};
    d.coupling_sq_over_det = coupling_sq_over_det;
    if (unit == "omega_B") return d;
    if (!(omega_b > 0.0)) throw ConfigError("drive: omega_B must be positive to convert rad/s");
    return d.scaled(omega_b);
}

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names = {
        "bands", "wannier", "couplings", "magic-depth", "bo-quench", "bo-modulate", "evolve", "dpt-trajectory",
        "dpt-phase-diagram", "amplify-scan", "ed-benchmark", "feasibility", "validate"};
    return names;
}

namespace {

struct ProbeVisitor {
    template <class T> void operator()(const char*, T&) {}
};

template <class T>
concept Sectioned = requires(T& t, ProbeVisitor& v) { t.fields(v); };

[[noreturn]] void type_error(const std::string& path, const char* expected) {
    throw ConfigError("config: " + path + " must be " + expected);
}

struct Reader;
template <class T> void read_value(const json& j, T& v, const std::string& path);
template <class T> void read_value(const json& j, std::optional<T>& v, const std::string& path);

struct Reader {
    const json& j;
    std::string path;
    std::set<std::string> seen;

    template <class T> void operator()(const char* key, T& v) {
        auto it = j.find(key);
        if (it == j.end()) return;
        seen.insert(key);
        read_value(*it, v, path.empty() ? std::string(key) : path + "." + key);
    }
    void finish() const {
        for (auto it = j.begin(); it != j.end(); ++it)
            if (!seen.count(it.key()))
                throw ConfigError("config: unknown key '" + (path.empty() ? it.key() : path + "." + it.key()) + "'");
    }
};

void read_grid(const json& j, GridSpec& g, const std::string& path) {
    if (!j.is_object()) type_error(path, "an object");
    g = GridSpec{};
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string k = it.key();
        if (k == "values") read_value(*it, g.values, path + ".values");
        else if (k == "start") { double x; read_value(*it, x, path + ".start"); g.start = x; }
        else if (k == "stop") { double x; read_value(*it, x, path + ".stop"); g.stop = x; }
        else if (k == "step") { double x; read_value(*it, x, path + ".step"); g.step = x; }
        else throw ConfigError("config: unknown key '" + path + "." + k + "'");
    }
    const bool has_range = g.start || g.stop || g.step;
    if (has_range == !g.values.empty() || (has_range && !(g.start && g.stop && g.step)))
        throw ConfigError("config: " + path + " needs either 'values' or all of start/stop/step");
}

template <class T> void read_value(const json& j, T& v, const std::string& path) {
    if constexpr (std::is_same_v<T, double>) {
        if (!j.is_number()) type_error(path, "a number");
        v = j.get<double>();
        if (!std::isfinite(v)) type_error(path, "finite");
    } else if constexpr (std::is_same_v<T, bool>) {
        if (!j.is_boolean()) type_error(path, "a boolean");
        v = j.get<bool>();
    } else if constexpr (std::is_same_v<T, int>) {
        if (!j.is_number_integer()) type_error(path, "an integer");
        const auto x = j.get<long long>();
        if (x < -1000000000LL || x > 1000000000LL) type_error(path, "within int range");
        v = static_cast<int>(x);
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
        if (!j.is_number_unsigned()) type_error(path, "a non-negative integer");
        v = j.get<std::uint64_t>();
    } else if constexpr (std::is_same_v<T, std::string>) {
        if (!j.is_string()) type_error(path, "a string");
        v = j.get<std::string>();
    } else if constexpr (std::is_same_v<T, std::vector<double>>) {
        if (!j.is_array()) type_error(path, "an array of numbers");
        v.clear();
        for (std::size_t i = 0; i < j.size(); ++i) {
            double x;
            read_value(j[i], x, path + "[" + std::to_string(i) + "]");
            v.push_back(x);
        }
    } else if constexpr (std::is_same_v<T, GridSpec>) {
        read_grid(j, v, path);
    } else if constexpr (Sectioned<T>) {
        if (!j.is_object()) type_error(path, "an object");
        Reader r{j, path, {}};
        v.fields(r);
        r.finish();
    } else {
        static_assert(sizeof(T) == 0, "unsupported config field type");
    }
}

template <class T> void read_value(const json& j, std::optional<T>& v, const std::string& path) {
    if (j.is_null()) {
        v.reset();
        return;
    }
    T x{};
    read_value(j, x, path);
    v = std::move(x);
}

template <class T> json write_value(T& v);

struct Writer {
    json out = json::object();
    template <class T> void operator()(const char* key, T& v) { out[key] = write_value(v); }
    template <class T> void operator()(const char* key, std::optional<T>& v) {
        if (v) out[key] = write_value(*v);
    }
};

template <class T> json write_value(T& v) {
    if constexpr (std::is_same_v<T, GridSpec>) {
        json g = json::object();
        if (!v.values.empty()) g["values"] = v.values;
        else {
            if (v.start) g["start"] = *v.start;
            if (v.stop) g["stop"] = *v.stop;
            if (v.step) g["step"] = *v.step;
        }
        return g;
    } else if constexpr (Sectioned<T>) {
        Writer w;
        v.fields(w);
        return w.out;
    } else {
        return json(v);
    }
}

void check_one_of(const std::string& value, std::initializer_list<const char*> allowed, const std::string& path) {
    for (const char* a : allowed)
        if (value == a) return;
    std::string msg = "config: " + path + " must be one of";
    for (const char* a : allowed) msg += std::string(" '") + a + "'";
    throw ConfigError(msg);
}

void check_semantics(const RunConfig& c) {
    if (c.schema_version != kSchemaVersion)
        throw ConfigError("config: unsupported schema_version " + std::to_string(c.schema_version));
    if (!c.command.empty()) {
        bool known = false;
        for (const auto& n : command_names()) known = known || n == c.command;
        if (!known) throw ConfigError("config: unknown command '" + c.command + "'");
    }
    if (c.sites.n_min > c.sites.n_max) throw ConfigError("config: sites.n_min must not exceed sites.n_max");
    if (c.numerics.n_bands < 1) throw ConfigError("config: numerics.n_bands must be >= 1");
    if (c.numerics.n_q < 16 || c.numerics.n_q % 2) throw ConfigError("config: numerics.n_q must be even and >= 16");
    check_one_of(c.numerics.ws_method, {"bessel", "numerical"}, "numerics.ws_method");
    if (!(c.numerics.dt > 0.0) || !(c.numerics.rtol > 0.0) || !(c.numerics.atol > 0.0) || !(c.numerics.quad_abs_tol > 0.0))
        throw ConfigError("config: numerics tolerances and dt must be positive");
    check_one_of(c.model.dynamics, {"atom-only", "atom-cavity"}, "model.dynamics");
    if (!(c.model.n_atoms > 0.0)) throw ConfigError("config: model.n_atoms must be positive");
    if (c.model.drive) check_one_of(c.model.drive->unit, {"rad/s", "omega_B"}, "model.drive.unit");
    if (c.model.drive && (c.model.v || c.model.beta))
        throw ConfigError("config: give either model.drive or model.v/model.beta, not both");
    if (c.phase_diagram) {
        c.phase_diagram->v.expand();
        c.phase_diagram->beta.expand();
    }
    if (c.amplify) {
        c.amplify->depth.expand();
        c.amplify->beta.expand();
    }
    if (c.ed && c.ed->depths.empty()) throw ConfigError("config: ed.depths must not be empty");
    if (c.feasibility && c.feasibility->temperatures.empty())
        throw ConfigError("config: feasibility.temperatures must not be empty");
    c.lattice.resolve();
}

}  // namespace

RunConfig config_from_json(const json& j) {
    RunConfig c;
    read_value(j, c, "");
    check_semantics(c);
    return c;
}

RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: malformed JSON: ") + e.what());
    }
    return config_from_json(j);
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

json config_to_json(const RunConfig& c) {
    RunConfig copy = c;
    return write_value(copy);
}

std::string canonical_config(const RunConfig& c) { return config_to_json(c).dump(2) + "\n"; }

std::string config_hash(const RunConfig& c) { return sha256_hex(canonical_config(c)); }

}  // namespace wscav
