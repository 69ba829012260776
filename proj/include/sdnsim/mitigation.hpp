#pragma once

#include <vector>

#include "sdnsim/analytics.hpp"
#include "sdnsim/routing.hpp"
#include "sdnsim/topology.hpp"

namespace sdnsim {

inline constexpr int kRedirectPriority = 30001;
inline constexpr int kReturnPriority = 40003;
inline constexpr int kLoopPriority = 30002;

/// Scrubber side of the two detour links.
inline constexpr Port kScrubberInPort{1};
inline constexpr Port kScrubberOutPort{2};

/// 0.1 Mbit/s with a 1000-packet queue.
inline constexpr LinkLimit kScrubberLinkLimit{12'500.0, 1000};

enum class EditOp { Delete, Add };

struct RuleEdit {
    EditOp op = EditOp::Add;
    FlowRule rule;
};

/// Scrubber detour for the suspicious flows toward one target.
///
/// Link 0 carries edge port 200 -> scrubber port 1 unconstrained; link 1
/// carries scrubber port 2 -> edge port 201 and is throttled. Per flow the
/// edits are: delete the base rule at the edge, redirect to port 200
/// (30001), return from port 201 to the original port (40003), and loop
/// through the scrubber (30002).
struct MitigationPlan {
    NodeId scrubber;
    NodeId attach_to;
    std::vector<Link> links;
    std::vector<FlowKey> flows;
    std::vector<RuleEdit> rule_edits;
};

/// Throws UsageError when the report carries no attack or no suspicious
/// sources, when scrubber serials are exhausted, or when a suspicious flow
/// has no installed base rule at the target's edge switch.
MitigationPlan plan_scrubber(const DetectionReport& report, const Topology& topology,
                             const RuleTable& rules);

struct AppliedMitigation {
    Topology topology;
    RuleTable rules;
    /// Rules deleted by the plan, with their cookies, for counter retirement.
    std::vector<FlowRule> removed;
};

/// Applies a plan to copies of the inputs; any failing edit throws
/// UsageError and leaves the inputs untouched.
AppliedMitigation apply(const MitigationPlan& plan, const Topology& topology,
                        const RuleTable& rules);

}  // namespace sdnsim
