#include <CLI11.hpp>
#include <iostream>

#include "wscav/error.hpp"
#include "wscav/io.hpp"

namespace {

int fail(int code, const std::string& msg) {
    std::cerr << "wscav: " << msg << "\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wannier-Stark lattice in a cavity: band structure, mean-field dynamics, DPT and amplification scans"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out_dir = "out";
    unsigned threads = 1;
    std::optional<std::uint64_t> seed;
    app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--threads", threads, "worker threads for parameter scans")->check(CLI::Range(1u, 1024u));
    app.add_option("--seed", seed, "RNG seed (overrides the config)");

    for (const auto& name : wscav::command_names()) app.add_subcommand(name, "run " + name);
    auto* verify = app.add_subcommand("verify", "check an output envelope against its payload hashes");
    std::string envelope;
    verify->add_option("path", envelope, "result.json or the directory holding it")->required();
    auto* print_config = app.add_option_group("misc");
    bool dump_config = false;
    print_config->add_flag("--print-config", dump_config, "print the canonical configuration and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (verify->parsed()) {
            const auto rep = wscav::verify_envelope(envelope);
            for (const auto& p : rep.problems) std::cerr << "verify: " << p << "\n";
            if (!rep.ok) return 3;
            std::cout << "ok\n";
            return 0;
        }
        const std::string command = app.get_subcommands().front()->get_name();
        wscav::RunConfig cfg = config_path.empty() ? wscav::RunConfig{} : wscav::load_config(config_path);
        // validate checks any config and, with --out, runs the command it names
        if (command != "validate" && !cfg.command.empty() && cfg.command != command)
            throw wscav::ConfigError("config command '" + cfg.command + "' does not match subcommand '" + command + "'");
        if (command != "validate" || cfg.command.empty()) cfg.command = command;
        if (seed) cfg.seed = *seed;
        if (dump_config) {
            std::cout << wscav::canonical_config(cfg);
            return 0;
        }
        if (command == "validate") {
            const auto rep = wscav::validate_config(cfg);
            nlohmann::json j = {{"derived", rep.derived}, {"warnings", rep.warnings}};
            std::cout << j.dump(2) << "\n";
            if (app.get_option("--out")->count() > 0) wscav::run(cfg, {out_dir, threads});
            return 0;
        }
        const auto res = wscav::run(cfg, {out_dir, threads});
        for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
        if (command == "feasibility") std::cout << res.envelope["summary"].dump(2) << "\n";
        else std::cout << (std::filesystem::path(out_dir) / "result.json").string() << "\n";
        return res.total_failure ? 3 : 0;
    } catch (const wscav::ConfigError& e) {
        return fail(2, e.what());
    } catch (const wscav::NumericalError& e) {
        return fail(3, e.what());
    } catch (const std::exception& e) {
        return fail(3, e.what());
    }
}
