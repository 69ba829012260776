#include "sdnsim/routing.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <tuple>

#include "sdnsim/error.hpp"

namespace sdnsim {

bool FlowRule::matches(const FlowKey& key, std::optional<Port> ingress) const {
    if (match_dst != key.dst) return false;
    if (match_src && *match_src != key.src) return false;
    if (in_port && (!ingress || *in_port != *ingress)) return false;
    return true;
}

bool FlowRule::same_match(const FlowRule& other) const {
    return at == other.at && match_src == other.match_src && match_dst == other.match_dst &&
           in_port == other.in_port && priority == other.priority;
}

std::string FlowRule::to_line() const {
    std::string line = at.name();
    line += " src=" + (match_src ? match_src->to_string() : std::string("*"));
    line += " dst=" + match_dst.to_string();
    if (in_port) line += " in=" + std::to_string(in_port->number);
    line += " out=" + std::to_string(out_port.number);
    line += " prio=" + std::to_string(priority);
    return line;
}

std::optional<FlowRule> RuleTable::install(FlowRule rule) {
    if (!rule.at.is_switch()) throw UsageError("rules can only be installed on switches");
    auto& list = tables_[rule.at];
    for (const FlowRule& existing : list)
        if (existing.same_match(rule)) return std::nullopt;
    rule.cookie = next_cookie_++;
    // Insert after every rule with priority >= ours so older rules win ties.
    auto pos = std::find_if(list.begin(), list.end(),
                            [&](const FlowRule& r) { return r.priority < rule.priority; });
    list.insert(pos, rule);
    return rule;
}

std::optional<FlowRule> RuleTable::remove(const FlowRule& pattern) {
    auto table = tables_.find(pattern.at);
    if (table == tables_.end()) return std::nullopt;
    auto& list = table->second;
    auto it = std::find_if(list.begin(), list.end(),
                           [&](const FlowRule& r) { return r.same_match(pattern); });
    if (it == list.end()) return std::nullopt;
    FlowRule removed = *it;
    list.erase(it);
    if (list.empty()) tables_.erase(table);
    return removed;
}

const FlowRule* RuleTable::find(const FlowRule& pattern) const {
    auto table = tables_.find(pattern.at);
    if (table == tables_.end()) return nullptr;
    for (const FlowRule& r : table->second)
        if (r.same_match(pattern)) return &r;
    return nullptr;
}

const FlowRule* RuleTable::lookup(const NodeId& at, const FlowKey& key,
                                  std::optional<Port> ingress) const {
    auto table = tables_.find(at);
    if (table == tables_.end()) return nullptr;
    for (const FlowRule& r : table->second)
        if (r.matches(key, ingress)) return &r;
    return nullptr;
}

const std::vector<FlowRule>& RuleTable::rules_at(const NodeId& at) const {
    static const std::vector<FlowRule> empty;
    auto table = tables_.find(at);
    return table == tables_.end() ? empty : table->second;
}

std::size_t RuleTable::size() const {
    std::size_t n = 0;
    for (const auto& [_, list] : tables_) n += list.size();
    return n;
}

std::vector<std::string> RuleTable::dump() const {
    std::vector<std::string> lines;
    for (const auto& [_, list] : tables_)
        for (const FlowRule& r : list) lines.push_back(r.to_line());
    return lines;
}

std::optional<Port> forward(const RuleTable& rules, const NodeId& at, const FlowKey& key,
                            std::optional<Port> ingress) {
    const FlowRule* rule = rules.lookup(at, key, ingress);
    if (!rule) return std::nullopt;
    return rule->out_port;
}

std::vector<NodeId> shortest_path(const Topology& topology, const NodeId& from,
                                  const NodeId& to) {
    if (!topology.contains(from)) throw UsageError("unknown node " + from.name());
    if (!topology.contains(to)) throw UsageError("unknown node " + to.name());
    if (from == to) return {from};

    const std::vector<NodeId> ids = topology.nodes();
    const auto index_of = [&ids](const NodeId& id) {
        return static_cast<std::size_t>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
    };
    const auto transit_ok = [&](const NodeId& id) {
        return id == from || id == to ||
               (id.kind != NodeKind::Host && id.kind != NodeKind::ScrubberSwitch);
    };

    // Distances are measured toward `to`, so next hops depend only on
    // (node, destination) and paths to one destination share a tree.
    constexpr int kInf = std::numeric_limits<int>::max();
    std::vector<int> dist(ids.size(), kInf);
    using Entry = std::pair<int, std::size_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> frontier;
    dist[index_of(to)] = 0;
    frontier.emplace(0, index_of(to));
    while (!frontier.empty()) {
        auto [d, u] = frontier.top();
        frontier.pop();
        if (d != dist[u]) continue;
        if (!transit_ok(ids[u]) && ids[u] != to) continue;
        for (const Neighbor& nb : topology.neighbors(ids[u])) {
            const std::size_t v = index_of(nb.node);
            if (d + 1 < dist[v]) {
                dist[v] = d + 1;
                frontier.emplace(dist[v], v);
            }
        }
    }

    if (dist[index_of(from)] == kInf)
        throw UsageError("no path from " + from.name() + " to " + to.name());

    std::vector<NodeId> path{from};
    NodeId current = from;
    while (current != to) {
        const int here = dist[index_of(current)];
        std::optional<NodeId> next;
        // neighbors() is sorted, so the first qualifying hop is the smallest id.
        for (const Neighbor& nb : topology.neighbors(current)) {
            if (!transit_ok(nb.node)) continue;
            if (dist[index_of(nb.node)] == here - 1) {
                next = nb.node;
                break;
            }
        }
        if (!next) throw InvariantViolation("broken distance field at " + current.name());
        path.push_back(*next);
        current = *next;
    }
    return path;
}

namespace {

Port port_or_throw(const Topology& topology, const NodeId& from, const NodeId& to) {
    auto port = topology.port_toward(from, to);
    if (!port) throw InvariantViolation("no link " + from.name() + " -> " + to.name());
    return *port;
}

/// Rules for one direction of a flow along `path` (host ... host).
void install_direction(RuleTable& rules, const Topology& topology, const FlowKey& key,
                       PacketInResult& result) {
    const NodeId src_host = *topology.host_at(key.src);
    const NodeId dst_host = *topology.host_at(key.dst);
    const std::vector<NodeId> path = shortest_path(topology, src_host, dst_host);

    for (std::size_t i = 1; i + 1 < path.size(); ++i) {
        const NodeId& sw = path[i];
        FlowRule rule;
        rule.at = sw;
        rule.match_dst = key.dst;
        rule.out_port = port_or_throw(topology, sw, path[i + 1]);
        if (sw.kind == NodeKind::EdgeSwitch) {
            rule.match_src = key.src;
        } else if (const FlowRule* existing = rules.find(rule)) {
            if (existing->out_port != rule.out_port)
                throw InvariantViolation("destination tree conflict at " + sw.name() + " for " +
                                         key.dst.to_string());
            continue;
        }
        if (auto stored = rules.install(rule)) result.written.push_back(*stored);
    }
}

bool has_ingress_rule(const RuleTable& rules, const Topology& topology, const FlowKey& key) {
    const NodeId edge = topology.edge_of(*topology.host_at(key.src));
    for (const FlowRule& r : rules.rules_at(edge))
        if (r.match_src == key.src && r.match_dst == key.dst && !r.in_port) return true;
    return false;
}

}  // namespace

PacketInResult handle_packet_in(RuleTable& rules, const Topology& topology, const FlowKey& key) {
    if (key.src == key.dst) throw UsageError("flow source equals destination");
    if (!topology.host_at(key.src) || !topology.host_at(key.dst))
        throw UsageError("flow endpoints must be known hosts");

    PacketInResult result;
    if (has_ingress_rule(rules, topology, key)) {
        result.already_installed = true;
        return result;
    }
    install_direction(rules, topology, key, result);
    if (!has_ingress_rule(rules, topology, key.reversed()))
        install_direction(rules, topology, key.reversed(), result);
    return result;
}

}  // namespace sdnsim
