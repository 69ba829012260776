#include "sdnsim/topology.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <tuple>

#include "sdnsim/error.hpp"

namespace sdnsim {

namespace {

bool parse_int(std::string_view text, int& out) {
    if (text.empty()) return false;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc{} && p == text.data() + text.size() && out >= 0;
}

}  // namespace

std::string NodeId::name() const {
    switch (kind) {
        case NodeKind::CoreSwitch:
            return "c" + std::to_string(a) + "-" + std::to_string(b);
        case NodeKind::EdgeSwitch:
            return "e" + std::to_string(a);
        case NodeKind::Host:
            return "h" + std::to_string(b) + "s" + std::to_string(a);
        case NodeKind::ScrubberSwitch:
            return "s" + std::to_string(a);
    }
    return "?";
}

std::optional<NodeId> NodeId::parse(std::string_view text) {
    if (text.size() < 2) return std::nullopt;
    const char tag = text.front();
    const std::string_view rest = text.substr(1);
    int x = 0;
    int y = 0;
    switch (tag) {
        case 'c': {
            auto dash = rest.find('-');
            if (dash == std::string_view::npos) return std::nullopt;
            if (!parse_int(rest.substr(0, dash), x) || !parse_int(rest.substr(dash + 1), y))
                return std::nullopt;
            return core(x, y);
        }
        case 'e':
            if (!parse_int(rest, x)) return std::nullopt;
            return edge(x);
        case 'h': {
            auto s = rest.find('s');
            if (s == std::string_view::npos) return std::nullopt;
            if (!parse_int(rest.substr(0, s), y) || !parse_int(rest.substr(s + 1), x))
                return std::nullopt;
            return host(x, y);
        }
        case 's':
            if (!parse_int(rest, x)) return std::nullopt;
            return scrubber(x);
        default:
            return std::nullopt;
    }
}

std::string_view to_string(NodeKind kind) {
    switch (kind) {
        case NodeKind::CoreSwitch: return "core";
        case NodeKind::EdgeSwitch: return "edge";
        case NodeKind::Host: return "host";
        case NodeKind::ScrubberSwitch: return "scrubber";
    }
    return "?";
}

std::string_view to_string(HostRole role) {
    switch (role) {
        case HostRole::Unassigned: return "none";
        case HostRole::Server: return "server";
        case HostRole::LegitClient: return "client";
        case HostRole::Attacker: return "attacker";
    }
    return "?";
}

std::vector<std::pair<int, int>> Topology::perimeter(int n, int m) {
    std::vector<std::pair<int, int>> cells;
    for (int j = 0; j < m; ++j) cells.emplace_back(0, j);
    for (int i = 1; i < n; ++i) cells.emplace_back(i, m - 1);
    for (int j = m - 2; j >= 0; --j) cells.emplace_back(n - 1, j);
    for (int i = n - 2; i >= 1; --i) cells.emplace_back(i, 0);
    return cells;
}

Topology Topology::build_grid(int n, int m, int k) {
    if (n < 2 || m < 2)
        throw UsageError("grid must be at least 2x2, got " + std::to_string(n) + "x" +
                         std::to_string(m));
    if (k < 1 || k > kMaxHostsPerEdge)
        throw UsageError("hosts per edge switch must be in [1, " +
                         std::to_string(kMaxHostsPerEdge) + "], got " + std::to_string(k));
    if (2 * n + 2 * m - 4 > 256)
        throw UsageError("grid perimeter exceeds the 10.0.<edge>.0/24 address plan");

    Topology t;
    t.rows_ = n;
    t.cols_ = m;
    t.hosts_per_edge_ = k;

    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) t.add_node(NodeId::core(i, j));

    auto connect = [&t](const NodeId& x, const NodeId& y) {
        t.add_link(Link{{x, t.next_free_port(x)}, {y, t.next_free_port(y)}, std::nullopt});
    };
    for (int i = 0; i < n; ++i)
        for (int j = 0; j + 1 < m; ++j) connect(NodeId::core(i, j), NodeId::core(i, j + 1));
    for (int i = 0; i + 1 < n; ++i)
        for (int j = 0; j < m; ++j) connect(NodeId::core(i, j), NodeId::core(i + 1, j));

    const auto cells = perimeter(n, m);
    for (int u = 0; u < static_cast<int>(cells.size()); ++u) {
        const NodeId edge = NodeId::edge(u);
        const NodeId core = NodeId::core(cells[u].first, cells[u].second);
        t.add_node(edge);
        t.add_link(Link{{edge, kEdgeUplinkPort}, {core, t.next_free_port(core)}, std::nullopt});
        for (int slot = 0; slot < k; ++slot) {
            const NodeId host = NodeId::host(u, slot);
            t.add_node(host, host_address(u, slot));
            t.add_link(Link{{host, kHostUplinkPort}, {edge, edge_host_port(slot)}, std::nullopt});
        }
    }
    return t;
}

void Topology::add_node(const NodeId& node, std::optional<Ipv4> address) {
    auto [it, inserted] = nodes_.try_emplace(node);
    if (!inserted) throw UsageError("duplicate node " + node.name());
    if (address) {
        it->second.address = address;
        by_ip_.emplace(*address, node);
    }
}

void Topology::add_link(Link link) {
    const std::size_t index = links_.size();
    for (const Endpoint* e : {&link.a, &link.b}) {
        auto& ports = nodes_.at(e->node).ports;
        if (!ports.emplace(e->port, index).second)
            throw InvariantViolation("port collision at " + e->node.name());
    }
    links_.push_back(std::move(link));
}

void Topology::attach_switch(const NodeId& node, const std::vector<Link>& links) {
    if (!node.is_switch()) throw UsageError("only switches can be attached");
    if (contains(node)) throw UsageError("duplicate node " + node.name());

    // Validate everything before touching state.
    std::set<Endpoint> claimed;
    for (const Link& link : links) {
        const bool a_new = link.a.node == node;
        const bool b_new = link.b.node == node;
        if (a_new == b_new)
            throw UsageError("link must join " + node.name() + " to one existing node");
        const Endpoint& existing = a_new ? link.b : link.a;
        if (!contains(existing.node))
            throw UsageError("dangling link endpoint " + existing.node.name());
        for (const Endpoint* e : {&link.a, &link.b}) {
            if (e->port.number <= 0) throw UsageError("port numbers must be positive");
            if (e->node != node && info(e->node).ports.count(e->port))
                throw UsageError("port " + std::to_string(e->port.number) + " already used on " +
                                 e->node.name());
            if (!claimed.insert(*e).second)
                throw UsageError("port " + std::to_string(e->port.number) +
                                 " used twice on " + e->node.name());
        }
        if (link.limit && (link.limit->capacity_bytes_per_s <= 0.0 ||
                           link.limit->queue_cap_packets < 0))
            throw UsageError("link limits must be positive");
    }

    add_node(node);
    for (const Link& link : links) add_link(link);
}

const Topology::NodeInfo& Topology::info(const NodeId& node) const {
    auto it = nodes_.find(node);
    if (it == nodes_.end()) throw UsageError("unknown node " + node.name());
    return it->second;
}

std::vector<NodeId> Topology::nodes() const {
    std::vector<NodeId> out;
    out.reserve(nodes_.size());
    for (const auto& [id, _] : nodes_) out.push_back(id);
    return out;
}

std::vector<NodeId> Topology::nodes_of(NodeKind kind) const {
    std::vector<NodeId> out;
    for (const auto& [id, _] : nodes_)
        if (id.kind == kind) out.push_back(id);
    return out;
}

std::size_t Topology::count(NodeKind kind) const {
    return static_cast<std::size_t>(std::count_if(
        nodes_.begin(), nodes_.end(), [kind](const auto& kv) { return kv.first.kind == kind; }));
}

std::vector<Neighbor> Topology::neighbors(const NodeId& node) const {
    std::vector<Neighbor> out;
    for (const auto& [port, index] : info(node).ports) {
        const Link& link = links_[index];
        const Endpoint& peer = link.peer_of(Endpoint{node, port});
        out.push_back(Neighbor{peer.node, port, peer.port, index});
    }
    std::sort(out.begin(), out.end(), [](const Neighbor& x, const Neighbor& y) {
        return std::tie(x.node, x.local_port) < std::tie(y.node, y.local_port);
    });
    return out;
}

std::optional<std::size_t> Topology::link_at(const Endpoint& at) const {
    auto node = nodes_.find(at.node);
    if (node == nodes_.end()) return std::nullopt;
    auto it = node->second.ports.find(at.port);
    if (it == node->second.ports.end()) return std::nullopt;
    return it->second;
}

std::optional<Port> Topology::port_toward(const NodeId& from, const NodeId& to) const {
    for (const auto& [port, index] : info(from).ports)
        if (links_[index].peer_of(Endpoint{from, port}).node == to) return port;
    return std::nullopt;
}

Port Topology::next_free_port(const NodeId& node) const {
    const auto& ports = info(node).ports;
    return ports.empty() ? Port{1} : Port{ports.rbegin()->first.number + 1};
}

std::optional<Ipv4> Topology::address_of(const NodeId& host) const {
    auto it = nodes_.find(host);
    if (it == nodes_.end()) return std::nullopt;
    return it->second.address;
}

std::optional<NodeId> Topology::host_at(Ipv4 address) const {
    auto it = by_ip_.find(address);
    if (it == by_ip_.end()) return std::nullopt;
    return it->second;
}

NodeId Topology::edge_of(const NodeId& host) const {
    if (host.kind != NodeKind::Host) throw UsageError(host.name() + " is not a host");
    info(host);
    return NodeId::edge(host.a);
}

void Topology::set_role(const NodeId& host, HostRole role) {
    if (host.kind != NodeKind::Host) throw UsageError(host.name() + " is not a host");
    auto it = nodes_.find(host);
    if (it == nodes_.end()) throw UsageError("unknown node " + host.name());
    it->second.role = role;
}

HostRole Topology::role_of(const NodeId& host) const { return info(host).role; }

std::vector<NodeId> Topology::hosts_with_role(HostRole role) const {
    std::vector<NodeId> out;
    for (const auto& [id, node] : nodes_)
        if (id.kind == NodeKind::Host && node.role == role) out.push_back(id);
    return out;
}

std::optional<int> Topology::next_scrubber_serial() const {
    for (int serial = kScrubberSerialBase; serial < kScrubberSerialBase + kMaxScrubbers; ++serial)
        if (!contains(NodeId::scrubber(serial))) return serial;
    return std::nullopt;
}

}  // namespace sdnsim
