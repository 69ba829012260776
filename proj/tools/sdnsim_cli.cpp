// sdnsim: run volumetric-attack scenarios on the simulated SDN grid.
//
//   sdnsim run --config <path> [--out <dir>] [--seed <u64>]
//   sdnsim init-config --template <reference|attack>
//
// Exit codes: 0 ok, 2 invalid config, 3 I/O failure, 4 internal invariant
// violation.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "sdnsim/error.hpp"
#include "sdnsim/scenario.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitInvariant = 4;

int run_command(const std::string& config_path, const std::string& out_dir,
                const std::optional<std::uint64_t>& seed) {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) {
        std::cerr << "error: cannot read config " << config_path << "\n";
        return kExitConfig;
    }
    std::stringstream buf;
    buf << in.rdbuf();

    auto result = sdnsim::validate_config(buf.str());
    if (!result.ok()) {
        for (const auto& e : result.errors) std::cerr << "config error: " << e << "\n";
        return kExitConfig;
    }
    sdnsim::ScenarioConfig config = *result.config;
    if (seed) config.seed = *seed;
    if (!out_dir.empty()) config.output_dir = out_dir;

    try {
        const auto outcome = sdnsim::execute_scenario(config);
        sdnsim::write_artifacts(outcome, config.output_dir);
        std::cout << "polls: " << outcome.analyses.size() << "\n";
        for (const auto& a : outcome.analyses) {
            if (!a.detection.attack) continue;
            std::cout << "attack detected at t=" << a.time << " (" << a.detection.suspicious_sources.size()
                      << " suspicious sources)\n";
            break;
        }
        if (outcome.mitigation)
            std::cout << "mitigation: " << outcome.mitigation->plan.scrubber.name() << " at "
                      << outcome.mitigation->plan.attach_to.name() << "\n";
        std::cout << "artifacts: " << config.output_dir << "/stats.csv, " << config.output_dir
                  << "/report.json\n";
    } catch (const sdnsim::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const sdnsim::UsageError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::logic_error& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInvariant;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Discrete-time SDN simulator for L3 volumetric attack detection"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    auto* run = app.add_subcommand("run", "Run a scenario and write stats.csv and report.json");
    run->add_option("--config", config_path, "Scenario config (JSON)")->required();
    run->add_option("--out", out_dir, "Output directory (overrides output_dir)");
    run->add_option("--seed", seed, "Seed (overrides seed)");

    std::string template_name;
    auto* init = app.add_subcommand("init-config", "Print a scenario template");
    init->add_option("--template", template_name, "reference | attack")->required();

    CLI11_PARSE(app, argc, argv);

    if (*run) return run_command(config_path, out_dir, seed);

    auto config = sdnsim::config_template(template_name);
    if (!config) {
        std::cerr << "unknown template '" << template_name << "' (expected reference or attack)\n";
        return kExitConfig;
    }
    std::cout << sdnsim::config_to_text(*config);
    return 0;
}
