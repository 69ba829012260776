#include <doctest.h>

#include "sdnsim/error.hpp"
#include "sdnsim/topology.hpp"
#include "support/oracles.hpp"

using namespace sdnsim;

TEST_CASE("grid 3x4x3 matches the reference figure") {
    const Topology t = Topology::build_grid(3, 4, 3);
    CHECK(t.count(NodeKind::CoreSwitch) == 12);
    CHECK(t.count(NodeKind::EdgeSwitch) == 10);
    CHECK(t.count(NodeKind::Host) == 30);
}

TEST_CASE("smallest legal grid") {
    const Topology t = Topology::build_grid(2, 2, 1);
    CHECK(t.count(NodeKind::CoreSwitch) == 4);
    CHECK(t.count(NodeKind::EdgeSwitch) == 4);
    CHECK(t.count(NodeKind::Host) == 4);
}

TEST_CASE("grid 3x3x2 is connected by BFS") {
    const Topology t = Topology::build_grid(3, 3, 2);
    CHECK(t.count(NodeKind::CoreSwitch) == 9);
    CHECK(t.count(NodeKind::EdgeSwitch) == 8);
    CHECK(t.count(NodeKind::Host) == 16);
    for (const NodeId& start : {NodeId::core(1, 1), NodeId::host(5, 1)})
        CHECK(oracle::bfs_distances(t, start).size() == t.node_count());
}

TEST_CASE("sizing formula and connectivity over a parameter sweep") {
    for (int n = 2; n <= 6; ++n)
        for (int m = 2; m <= 6; ++m)
            for (int k = 1; k <= 4; ++k) {
                const Topology t = Topology::build_grid(n, m, k);
                const std::size_t edges = static_cast<std::size_t>(2 * n + 2 * m - 4);
                CHECK(t.count(NodeKind::CoreSwitch) == static_cast<std::size_t>(n * m));
                CHECK(t.count(NodeKind::EdgeSwitch) == edges);
                CHECK(t.count(NodeKind::Host) == edges * static_cast<std::size_t>(k));
                CHECK(oracle::bfs_distances(t, NodeId::host(0, 0)).size() == t.node_count());
            }
}

TEST_CASE("core grid is 4-neighbour and every perimeter cell has one edge switch") {
    const Topology t = Topology::build_grid(3, 4, 2);
    for (const NodeId& c : t.nodes_of(NodeKind::CoreSwitch)) {
        int cores = 0;
        int edges = 0;
        for (const Neighbor& nb : t.neighbors(c)) {
            if (nb.node.kind == NodeKind::CoreSwitch) {
                ++cores;
                CHECK(std::abs(nb.node.a - c.a) + std::abs(nb.node.b - c.b) == 1);
            }
            if (nb.node.kind == NodeKind::EdgeSwitch) ++edges;
        }
        const bool interior = c.a > 0 && c.a < 2 && c.b > 0 && c.b < 3;
        CHECK(edges == (interior ? 0 : 1));
        CHECK(cores == (c.a > 0) + (c.a < 2) + (c.b > 0) + (c.b < 3));
    }
}

TEST_CASE("perimeter runs clockwise from the origin") {
    const auto cells = Topology::perimeter(3, 4);
    REQUIRE(cells.size() == 10);
    CHECK(cells.front() == std::pair{0, 0});
    CHECK(cells[3] == std::pair{0, 3});
    CHECK(cells[5] == std::pair{2, 3});
    CHECK(cells[8] == std::pair{2, 0});
    CHECK(cells[9] == std::pair{1, 0});
}

TEST_CASE("host addressing and ports follow the 10.0.u.i / 80+i convention") {
    const Topology t = Topology::build_grid(3, 4, 3);
    CHECK(t.ip_map().size() == 30);
    for (const NodeId& h : t.nodes_of(NodeKind::Host)) {
        const Ipv4 ip = *t.address_of(h);
        CHECK(ip == host_address(h.a, h.b));
        CHECK(t.host_at(ip) == h);
        CHECK(t.port_toward(t.edge_of(h), h) == edge_host_port(h.b));
        CHECK(t.port_toward(h, t.edge_of(h)) == kHostUplinkPort);
    }
    CHECK(t.port_toward(NodeId::edge(4), NodeId::core(1, 3)) == kEdgeUplinkPort);
}

TEST_CASE("build_grid is deterministic") {
    CHECK(Topology::build_grid(4, 3, 2) == Topology::build_grid(4, 3, 2));
    CHECK_FALSE(Topology::build_grid(4, 3, 2) == Topology::build_grid(3, 4, 2));
}

TEST_CASE("degenerate grids are rejected") {
    CHECK_THROWS_AS(Topology::build_grid(1, 4, 3), UsageError);
    CHECK_THROWS_AS(Topology::build_grid(3, 1, 3), UsageError);
    CHECK_THROWS_AS(Topology::build_grid(3, 4, 0), UsageError);
    CHECK_THROWS_AS(Topology::build_grid(3, 4, kMaxHostsPerEdge + 1), UsageError);
}

TEST_CASE("node names round-trip") {
    const Topology t = Topology::build_grid(3, 4, 2);
    for (const NodeId& id : t.nodes()) CHECK(NodeId::parse(id.name()) == id);
    CHECK(NodeId::parse("s200") == NodeId::scrubber(200));
    CHECK_FALSE(NodeId::parse("x1").has_value());
    CHECK_FALSE(NodeId::parse("c1").has_value());
    CHECK_FALSE(NodeId::parse("h-1s2").has_value());
}

TEST_CASE("attach_switch adds a scrubber with two links") {
    Topology t = Topology::build_grid(3, 4, 3);
    const std::size_t nodes = t.node_count();
    const std::size_t links = t.links().size();
    const NodeId s = NodeId::scrubber(200);
    const NodeId e = NodeId::edge(3);
    t.attach_switch(s, {Link{{e, Port{200}}, {s, Port{1}}, std::nullopt},
                        Link{{s, Port{2}}, {e, Port{201}}, LinkLimit{12'500.0, 1000}}});
    CHECK(t.node_count() == nodes + 1);
    CHECK(t.links().size() == links + 2);
    CHECK(oracle::bfs_distances(t, e).at(s) == 1);
    CHECK(oracle::bfs_distances(t, NodeId::host(7, 2)).size() == t.node_count());
}

TEST_CASE("attach_switch rejects bad requests without side effects") {
    Topology t = Topology::build_grid(2, 2, 1);
    const Topology before = t;
    const NodeId s = NodeId::scrubber(200);

    SUBCASE("port collision") {
        CHECK_THROWS_AS(t.attach_switch(s, {Link{{NodeId::edge(0), kEdgeUplinkPort}, {s, Port{1}}, {}}}),
                        UsageError);
    }
    SUBCASE("duplicate node") {
        CHECK_THROWS_AS(t.attach_switch(NodeId::core(0, 0), {}), UsageError);
    }
    SUBCASE("dangling endpoint") {
        CHECK_THROWS_AS(t.attach_switch(s, {Link{{NodeId::edge(9), Port{200}}, {s, Port{1}}, {}}}),
                        UsageError);
    }
    SUBCASE("same port twice on the new switch") {
        CHECK_THROWS_AS(t.attach_switch(s, {Link{{NodeId::edge(0), Port{200}}, {s, Port{1}}, {}},
                                            Link{{s, Port{1}}, {NodeId::edge(0), Port{201}}, {}}}),
                        UsageError);
    }
    CHECK(t == before);
}

TEST_CASE("roles are annotations on hosts") {
    Topology t = Topology::build_grid(2, 2, 2);
    t.set_role(NodeId::host(0, 0), HostRole::Server);
    t.set_role(NodeId::host(1, 1), HostRole::Attacker);
    CHECK(t.hosts_with_role(HostRole::Server) == std::vector{NodeId::host(0, 0)});
    CHECK(t.role_of(NodeId::host(1, 1)) == HostRole::Attacker);
    CHECK(t.hosts_with_role(HostRole::Unassigned).size() == 6);
    CHECK_THROWS_AS(t.set_role(NodeId::edge(0), HostRole::Server), UsageError);
}
