#pragma once

#include <json.hpp>

#include "sdnsim/analytics.hpp"
#include "sdnsim/mitigation.hpp"
#include "sdnsim/simnet.hpp"
#include "sdnsim/telemetry.hpp"
#include "sdnsim/topology.hpp"

namespace sdnsim {

// Structured report fragments. nlohmann::json keeps object keys sorted, so
// dumps are byte-stable for identical inputs.

nlohmann::json to_json(const Topology& topology);
nlohmann::json to_json(const FlowRule& rule);
nlohmann::json to_json(const DeltaRecord& d);
nlohmann::json to_json(const FeatureVector& f);
nlohmann::json to_json(const Clustering& c);
nlohmann::json to_json(const Decomposition& d);
nlohmann::json to_json(const DetectionReport& r);
nlohmann::json to_json(const MitigationPlan& plan);
nlohmann::json to_json(const FlowTally& t);
nlohmann::json to_json(const LinkState& s);
nlohmann::json to_json(const Event& e);

/// Parses the "deltas" array written by to_json(DeltaRecord).
std::vector<DeltaRecord> deltas_from_json(const nlohmann::json& array);

}  // namespace sdnsim
