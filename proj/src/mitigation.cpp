#include "sdnsim/mitigation.hpp"

#include "sdnsim/error.hpp"

namespace sdnsim {

MitigationPlan plan_scrubber(const DetectionReport& report, const Topology& topology,
                             const RuleTable& rules) {
    if (!report.attack) throw UsageError("no attack in detection report");
    if (report.suspicious_sources.empty()) throw UsageError("no suspicious sources to scrub");
    const auto target = topology.host_at(report.target);
    if (!target) throw UsageError("unknown target " + report.target.to_string());
    const auto serial = topology.next_scrubber_serial();
    if (!serial) throw UsageError("scrubber serials exhausted");

    MitigationPlan plan;
    plan.scrubber = NodeId::scrubber(*serial);
    plan.attach_to = topology.edge_of(*target);
    // The detour ports are fixed, so one scrubber per edge switch.
    if (topology.link_at({plan.attach_to, kScrubberRedirectPort}))
        throw UsageError(plan.attach_to.name() + " already has a scrubber attached");
    plan.links = {
        Link{{plan.attach_to, kScrubberRedirectPort}, {plan.scrubber, kScrubberInPort}, std::nullopt},
        Link{{plan.scrubber, kScrubberOutPort}, {plan.attach_to, kScrubberReturnPort},
             kScrubberLinkLimit},
    };

    for (Ipv4 source : report.suspicious_sources) {
        FlowRule base;
        base.at = plan.attach_to;
        base.match_src = source;
        base.match_dst = report.target;
        base.priority = kBaseRulePriority;
        const FlowRule* installed = rules.find(base);
        if (!installed)
            throw UsageError("no installed rule for " + source.to_string() + "->" +
                             report.target.to_string() + " at " + plan.attach_to.name());

        FlowRule redirect = base;
        redirect.out_port = kScrubberRedirectPort;
        redirect.priority = kRedirectPriority;

        FlowRule turn;
        turn.at = plan.attach_to;
        turn.match_dst = report.target;
        turn.in_port = kScrubberReturnPort;
        turn.out_port = installed->out_port;
        turn.priority = kReturnPriority;

        FlowRule loop = base;
        loop.at = plan.scrubber;
        loop.out_port = kScrubberOutPort;
        loop.priority = kLoopPriority;

        plan.flows.push_back(FlowKey{source, report.target});
        plan.rule_edits.push_back(RuleEdit{EditOp::Delete, *installed});
        plan.rule_edits.push_back(RuleEdit{EditOp::Add, redirect});
        plan.rule_edits.push_back(RuleEdit{EditOp::Add, turn});
        plan.rule_edits.push_back(RuleEdit{EditOp::Add, loop});
    }
    return plan;
}

AppliedMitigation apply(const MitigationPlan& plan, const Topology& topology,
                        const RuleTable& rules) {
    AppliedMitigation out{topology, rules, {}};
    out.topology.attach_switch(plan.scrubber, plan.links);

    for (const RuleEdit& edit : plan.rule_edits) {
        if (!out.topology.contains(edit.rule.at))
            throw UsageError("rule edit references missing switch " + edit.rule.at.name());
        if (edit.op == EditOp::Delete) {
            auto removed = out.rules.remove(edit.rule);
            if (!removed) throw UsageError("rule to delete is missing: " + edit.rule.to_line());
            out.removed.push_back(*removed);
            continue;
        }
        if (!out.rules.install(edit.rule)) {
            // The per-target return rule is shared by every scrubbed flow.
            const FlowRule* existing = out.rules.find(edit.rule);
            if (existing->out_port != edit.rule.out_port)
                throw UsageError("conflicting rule already installed: " + edit.rule.to_line());
        }
    }
    return out;
}

}  // namespace sdnsim
