#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sdnsim/address.hpp"
#include "sdnsim/topology.hpp"

namespace sdnsim {

/// Default priority for controller-installed rules.
inline constexpr int kBaseRulePriority = 20001;

struct FlowKey {
    Ipv4 src;
    Ipv4 dst;

    FlowKey reversed() const { return FlowKey{dst, src}; }
    auto operator<=>(const FlowKey&) const = default;
};

/// Match-action entry. Edge switch rules match src and dst; core rules match
/// dst only. `in_port` is only used by the scrubber return rule.
struct FlowRule {
    NodeId at;
    std::optional<Ipv4> match_src;
    Ipv4 match_dst;
    std::optional<Port> in_port;
    Port out_port;
    int priority = kBaseRulePriority;
    /// Assigned by RuleTable on install; identifies the rule's counters.
    std::uint64_t cookie = 0;

    bool matches(const FlowKey& key, std::optional<Port> ingress) const;
    /// Same (switch, match fields, priority); ignores action and cookie.
    bool same_match(const FlowRule& other) const;
    std::string to_line() const;

    bool operator==(const FlowRule&) const = default;
};

/// Per-switch rule lists in lookup order: descending priority, then
/// insertion order.
class RuleTable {
public:
    /// Installs a copy of `rule` with a fresh cookie. Returns the stored rule,
    /// or nullopt when a rule with the same match and priority exists.
    std::optional<FlowRule> install(FlowRule rule);
    /// Removes the rule with the same match and priority as `pattern`.
    std::optional<FlowRule> remove(const FlowRule& pattern);
    const FlowRule* find(const FlowRule& pattern) const;

    /// Highest-priority rule matching the packet, or nullptr on MISS.
    const FlowRule* lookup(const NodeId& at, const FlowKey& key,
                           std::optional<Port> ingress = std::nullopt) const;

    const std::vector<FlowRule>& rules_at(const NodeId& at) const;
    const std::map<NodeId, std::vector<FlowRule>>& tables() const { return tables_; }
    std::size_t size() const;

    /// One line per rule, switches in canonical order.
    std::vector<std::string> dump() const;

    bool operator==(const RuleTable&) const = default;

private:
    std::map<NodeId, std::vector<FlowRule>> tables_;
    std::uint64_t next_cookie_ = 1;
};

/// Switch datapath lookup; nullopt is a MISS.
std::optional<Port> forward(const RuleTable& rules, const NodeId& at, const FlowKey& key,
                            std::optional<Port> ingress = std::nullopt);

/// Minimum-hop path from `from` to `to` inclusive, computed with Dijkstra over
/// unit weights. Among equal-cost next hops the smallest NodeId wins, so all
/// paths toward one destination form a tree. Scrubbers are never transit.
/// Throws UsageError for unknown or unreachable endpoints.
std::vector<NodeId> shortest_path(const Topology& topology, const NodeId& from,
                                  const NodeId& to);

struct PacketInResult {
    std::vector<FlowRule> written;
    bool already_installed = false;
};

/// Controller reaction to the first packet of `key`: installs the forward
/// path and the reverse path, skipping core rules that already exist.
PacketInResult handle_packet_in(RuleTable& rules, const Topology& topology, const FlowKey& key);

}  // namespace sdnsim
