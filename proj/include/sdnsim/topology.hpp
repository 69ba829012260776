#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sdnsim/address.hpp"

namespace sdnsim {

enum class NodeKind : std::uint8_t { CoreSwitch, EdgeSwitch, Host, ScrubberSwitch };

/// Canonical node identity. Ordering is (kind, a, b) and drives every
/// deterministic tie-break in the simulator.
///
///   core:     a = row i, b = column j
///   edge:     a = perimeter index u
///   host:     a = edge index u, b = slot
///   scrubber: a = serial (200 + n)
struct NodeId {
    NodeKind kind = NodeKind::CoreSwitch;
    int a = 0;
    int b = 0;

    static constexpr NodeId core(int i, int j) { return {NodeKind::CoreSwitch, i, j}; }
    static constexpr NodeId edge(int u) { return {NodeKind::EdgeSwitch, u, 0}; }
    static constexpr NodeId host(int u, int slot) { return {NodeKind::Host, u, slot}; }
    static constexpr NodeId scrubber(int serial) { return {NodeKind::ScrubberSwitch, serial, 0}; }

    bool is_switch() const { return kind != NodeKind::Host; }

    /// c<i>-<j>, e<u>, h<slot>s<u>, s<serial>
    std::string name() const;
    static std::optional<NodeId> parse(std::string_view text);

    constexpr auto operator<=>(const NodeId&) const = default;
};

struct Port {
    int number = 0;
    constexpr auto operator<=>(const Port&) const = default;
};

inline constexpr Port kHostUplinkPort{1};
inline constexpr Port kEdgeUplinkPort{1};
inline constexpr int kEdgeHostPortBase = 80;
inline constexpr Port kScrubberRedirectPort{200};
inline constexpr Port kScrubberReturnPort{201};
inline constexpr int kScrubberSerialBase = 200;
inline constexpr int kMaxScrubbers = 99;
inline constexpr int kMaxHostsPerEdge = kScrubberRedirectPort.number - kEdgeHostPortBase;

constexpr Port edge_host_port(int slot) { return Port{kEdgeHostPortBase + slot}; }

struct Endpoint {
    NodeId node;
    Port port;
    auto operator<=>(const Endpoint&) const = default;
};

/// Capacity and queue limits only exist together.
struct LinkLimit {
    double capacity_bytes_per_s = 0.0;
    int queue_cap_packets = 0;
    bool operator==(const LinkLimit&) const = default;
};

struct Link {
    Endpoint a;
    Endpoint b;
    std::optional<LinkLimit> limit;

    bool constrained() const { return limit.has_value(); }
    const Endpoint& peer_of(const Endpoint& e) const { return e == a ? b : a; }
    bool operator==(const Link&) const = default;
};

enum class HostRole : std::uint8_t { Unassigned, Server, LegitClient, Attacker };

std::string_view to_string(NodeKind kind);
std::string_view to_string(HostRole role);

/// Adjacent node reached through a local port.
struct Neighbor {
    NodeId node;
    Port local_port;
    Port remote_port;
    std::size_t link_index;
};

/// Network graph: N x M orthogonal core grid, one edge switch per perimeter
/// core switch, K hosts per edge switch, plus any attached scrubbers.
class Topology {
public:
    /// Throws UsageError for n < 2, m < 2, k < 1 or k > kMaxHostsPerEdge.
    static Topology build_grid(int n, int m, int k);

    /// Adds a switch and its links with the strong exception guarantee.
    /// Every link must join `node` to an existing node on unused ports.
    void attach_switch(const NodeId& node, const std::vector<Link>& links);

    int grid_rows() const { return rows_; }
    int grid_cols() const { return cols_; }
    int hosts_per_edge() const { return hosts_per_edge_; }

    bool contains(const NodeId& node) const { return nodes_.count(node) != 0; }
    std::vector<NodeId> nodes() const;
    std::vector<NodeId> nodes_of(NodeKind kind) const;
    std::size_t count(NodeKind kind) const;
    std::size_t node_count() const { return nodes_.size(); }
    const std::vector<Link>& links() const { return links_; }

    /// Neighbors in ascending (node, local port) order.
    std::vector<Neighbor> neighbors(const NodeId& node) const;
    /// Link index attached to (node, port), if any.
    std::optional<std::size_t> link_at(const Endpoint& at) const;
    /// Lowest local port on `from` whose link reaches `to`.
    std::optional<Port> port_toward(const NodeId& from, const NodeId& to) const;
    Port next_free_port(const NodeId& node) const;

    std::optional<Ipv4> address_of(const NodeId& host) const;
    std::optional<NodeId> host_at(Ipv4 address) const;
    /// Edge switch a host hangs off.
    NodeId edge_of(const NodeId& host) const;
    const std::map<Ipv4, NodeId>& ip_map() const { return by_ip_; }

    void set_role(const NodeId& host, HostRole role);
    HostRole role_of(const NodeId& host) const;
    std::vector<NodeId> hosts_with_role(HostRole role) const;

    std::optional<int> next_scrubber_serial() const;

    /// Perimeter cells of an n x m grid, clockwise from (0, 0).
    static std::vector<std::pair<int, int>> perimeter(int n, int m);

    bool operator==(const Topology&) const = default;

private:
    struct NodeInfo {
        std::optional<Ipv4> address;
        HostRole role = HostRole::Unassigned;
        std::map<Port, std::size_t> ports;
        bool operator==(const NodeInfo&) const = default;
    };

    void add_node(const NodeId& node, std::optional<Ipv4> address = std::nullopt);
    void add_link(Link link);
    const NodeInfo& info(const NodeId& node) const;

    int rows_ = 0;
    int cols_ = 0;
    int hosts_per_edge_ = 0;
    std::map<NodeId, NodeInfo> nodes_;
    std::vector<Link> links_;
    std::map<Ipv4, NodeId> by_ip_;
};

}  // namespace sdnsim
