#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "etp/errors.hpp"
#include "etp/scenario.hpp"

namespace {

enum Exit { kOk = 0, kConfig = 2, kPhysics = 3, kIo = 4 };

namespace sc = etp::scenario;

int run(const std::filesystem::path& config_path, const std::string& out_override, bool svg,
        const std::string& engine_flag) {
    const sc::ScenarioConfig cfg = sc::load_config(config_path);
    std::optional<sc::Engine> engine;
    if (!engine_flag.empty()) engine = sc::parse_engine(engine_flag);
    const sc::ScenarioOutput out = sc::run_scenario(cfg, engine);
    std::filesystem::path dir = out_override.empty() ? cfg.output_dir : std::filesystem::path(out_override);
    if (out_override.empty() && dir.is_relative()) dir = config_path.parent_path() / dir;
    sc::write_outputs(out, dir, svg);
    std::cout << "wrote " << out.files.size() + 1 << " files to " << dir.string() << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"etp-sim: electron-photon scattering scenarios"};
    app.require_subcommand(1);

    std::string config;
    std::string out_dir;
    std::string engine;
    bool svg = false;

    auto* run_cmd = app.add_subcommand("run", "Run a scenario and write its output tables");
    run_cmd->add_option("--config", config, "Scenario JSON file")->required();
    run_cmd->add_option("--out", out_dir, "Output directory (overrides output_dir)");
    run_cmd->add_flag("--svg", svg, "Also render SVG plots");
    run_cmd->add_option("--engine", engine, "Evolution engine")
        ->check(CLI::IsMember({"analytic", "oracle", "both"}));

    auto* validate_cmd = app.add_subcommand("validate", "Check a scenario file without running it");
    validate_cmd->add_option("--config", config, "Scenario JSON file")->required();

    app.add_subcommand("version", "Print the version");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (app.got_subcommand("version")) {
            std::cout << "etp-sim " << ETP_VERSION << '\n';
            return kOk;
        }
        if (app.got_subcommand("validate")) {
            sc::load_config(config);
            std::cout << "ok\n";
            return kOk;
        }
        return run(config, out_dir, svg, engine);
    } catch (const sc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const etp::PhysicsError& e) {
        std::cerr << "physics error: " << e.what() << '\n';
        return kPhysics;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kIo;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
