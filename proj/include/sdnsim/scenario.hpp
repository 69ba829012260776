#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sdnsim/analytics.hpp"
#include "sdnsim/mitigation.hpp"
#include "sdnsim/simnet.hpp"
#include "sdnsim/topology.hpp"

namespace sdnsim {

/// Flat scenario document. Optional fields are derived when absent:
///   attack_rate = 10 x the largest legitimate rate
///   threshold   = 10 x the designed legitimate aggregate byte rate
///   bandwidth   = Silverman's rule per poll
struct ScenarioConfig {
    int grid_n = 3;
    int grid_m = 4;
    int grid_k = 3;
    int server_edge = 0;
    int server_slot = 0;
    int client_matrix = 3;
    double base_rate = 2.0;
    std::uint32_t request_size = 200;
    std::uint32_t response_size = 1000;
    std::vector<Ipv4> attackers;
    std::optional<double> attack_rate;
    double attack_start = 20.0;
    double duration = 60.0;
    double tick = 1.0;
    double poll_interval = 5.0;
    std::uint64_t seed = 1;
    std::optional<double> threshold;
    int k_clusters = 5;
    std::optional<double> bandwidth;
    double match_radius = 1000.0;
    bool normalize = false;
    bool mitigation = true;
    std::string output_dir = "out";

    double max_legit_rate() const;
    /// Sum of client request byte rates the scenario is designed to produce.
    double legit_aggregate_byte_rate() const;
    double effective_attack_rate() const;
    double effective_threshold() const;
    SimConfig sim_config() const;
};

struct ValidationResult {
    std::optional<ScenarioConfig> config;
    std::vector<std::string> errors;
    bool ok() const { return config.has_value(); }
};

/// Parses a JSON object document. An empty document yields the defaults.
/// Unknown keys are errors. Every violation is reported, not just the first.
ValidationResult validate_config(std::string_view raw);

/// Field names accepted by validate_config, in document order.
const std::vector<std::string>& config_fields();

std::string config_to_text(const ScenarioConfig& config);

/// Template names: "reference" (no attack) and "attack" (10 attackers).
std::optional<ScenarioConfig> config_template(std::string_view name);

/// Topology with roles assigned plus one traffic profile per active host.
struct ScenarioSetup {
    Topology topology;
    std::map<NodeId, TrafficProfile> profiles;
    NodeId server;
    std::vector<NodeId> clients;
    std::vector<NodeId> attackers;
};

ScenarioSetup build_scenario(const ScenarioConfig& config);

/// Analytics evaluated at one poll.
struct PollAnalysis {
    double time = 0.0;
    double aggregate_byte_rate = 0.0;
    std::vector<FeatureVector> features;
    std::optional<Clustering> clustering;
    DetectionReport detection;
    std::optional<Decomposition> decomposition;
    double bandwidth = 0.0;
    std::vector<std::size_t> new_clusters;
};

struct MitigationRecord {
    double time = 0.0;
    MitigationPlan plan;
    std::vector<std::string> rules_after;
};

struct ScenarioOutcome {
    ScenarioConfig config;
    ScenarioSetup setup;
    RunRecord record;
    std::vector<PollAnalysis> analyses;
    std::optional<MitigationRecord> mitigation;
    Topology final_topology;
    std::vector<std::string> final_rules;
    std::vector<LinkState> links;

    std::string stats_csv() const;
    std::string report_text() const;
};

/// Observes the simulation after every tick.
using TickObserver = std::function<void(const Simulation&)>;

/// Runs the scenario with analytics at every poll and at most one mitigation.
ScenarioOutcome execute_scenario(const ScenarioConfig& config, const TickObserver& observer = {});

/// Writes stats.csv and report.json into `dir`, creating it if needed.
/// Throws IoError when the directory or files cannot be written.
void write_artifacts(const ScenarioOutcome& outcome, const std::filesystem::path& dir);

}  // namespace sdnsim
