#include <doctest.h>

#include <algorithm>

#include "sdnsim/analytics.hpp"
#include "sdnsim/error.hpp"
#include "sdnsim/mitigation.hpp"
#include "sdnsim/simnet.hpp"
#include "support/oracles.hpp"

using namespace sdnsim;

namespace {

const NodeId kServer = NodeId::host(0, 0);

std::map<NodeId, TrafficProfile> profiles(std::initializer_list<std::pair<NodeId, double>> clients,
                                          std::uint32_t req = 200, std::uint32_t resp = 1000) {
    std::map<NodeId, TrafficProfile> out{{kServer, TrafficProfile{ProfileKind::Server, 0, req, resp}}};
    for (const auto& [node, rate] : clients)
        out[node] = TrafficProfile{ProfileKind::LegitClient, rate, req, resp};
    return out;
}

SimConfig config(double duration, double poll = 5.0, std::uint64_t seed = 1) {
    SimConfig c;
    c.duration = duration;
    c.poll_interval = poll;
    c.seed = seed;
    return c;
}

FlowKey key(const NodeId& a, const NodeId& b) {
    return FlowKey{host_address(a.a, a.b), host_address(b.a, b.b)};
}

bool conserved(const FlowTally& f, std::uint64_t queued) {
    return f.emitted_packets == f.delivered_packets + queued + f.dropped_packets + f.missed_packets;
}

}  // namespace

TEST_CASE("legit rates across the client matrix") {
    std::vector<double> rates;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) rates.push_back(legit_rate(i, j, 3, 1.0));
    std::sort(rates.begin(), rates.end());
    CHECK(rates == std::vector<double>{1, 2, 2, 3, 3, 3, 4, 4, 5});
    CHECK(legit_rate(2, 2, 3, 2.0) == 10.0);
}

TEST_CASE("config validation") {
    SimConfig c = config(60);
    CHECK_NOTHROW(c.validate());
    c.tick = 0;
    CHECK_THROWS_AS(c.validate(), UsageError);
    c = config(60, 2.5);
    CHECK_THROWS_AS(c.validate(), UsageError);
    c = config(7.5);
    CHECK_THROWS_AS(c.validate(), UsageError);
    CHECK(config(60).total_ticks() == 60);
    CHECK(config(60).ticks_per_poll() == 5);
}

TEST_CASE("one client at 2 req/s for 10 ticks") {
    const Topology t = Topology::build_grid(3, 4, 3);
    const NodeId client = NodeId::host(5, 1);
    Simulation sim(t, RuleTable{}, profiles({{client, 2.0}}), config(10));
    while (!sim.finished()) sim.step();

    const FlowTally up = sim.tallies().at(key(client, kServer));
    const FlowTally down = sim.tallies().at(key(kServer, client));
    CHECK(up.emitted_packets == 20);
    CHECK(up.delivered_packets == 20);
    CHECK(up.delivered_bytes == 20 * 200);
    CHECK(down.delivered_packets == 20);
    CHECK(down.delivered_bytes == 20 * 1000);
    CHECK(up.missed_packets == 0);

    // The ingress rule counted every request exactly once.
    const FlowRule* rule = sim.rules().lookup(t.edge_of(client), key(client, kServer),
                                               edge_host_port(client.b));
    REQUIRE(rule != nullptr);
    CHECK(sim.counters().get(rule->cookie) == Counter{20, 4000});
}

TEST_CASE("a silent client creates no flow and no rules") {
    const Topology t = Topology::build_grid(3, 4, 3);
    Simulation sim(t, RuleTable{}, profiles({{NodeId::host(3, 0), 0.0}}), config(10));
    while (!sim.finished()) sim.step();
    CHECK(sim.tallies().empty());
    CHECK(sim.rules().size() == 0);
}

TEST_CASE("fractional rates accumulate without loss") {
    const Topology t = Topology::build_grid(2, 2, 2);
    const NodeId client = NodeId::host(2, 1);
    Simulation sim(t, RuleTable{}, profiles({{client, 0.5}}), config(20));
    while (!sim.finished()) sim.step();
    CHECK(sim.tallies().at(key(client, kServer)).emitted_packets == 10);
}

TEST_CASE("simulation rejects a missing server or a profiled switch") {
    const Topology t = Topology::build_grid(2, 2, 1);
    std::map<NodeId, TrafficProfile> none{{NodeId::host(1, 0), TrafficProfile{}}};
    CHECK_THROWS_AS(Simulation(t, RuleTable{}, none, config(5)), UsageError);
    auto bad = profiles({});
    bad[NodeId::edge(1)] = TrafficProfile{};
    CHECK_THROWS_AS(Simulation(t, RuleTable{}, bad, config(5)), UsageError);
}

TEST_CASE("unconstrained paths deliver everything, every tick") {
    const Topology t = Topology::build_grid(3, 4, 3);
    auto prof = profiles({{NodeId::host(1, 0), 1.5}, {NodeId::host(4, 2), 3.0}, {NodeId::host(7, 1), 0.3}});
    Simulation sim(t, RuleTable{}, prof, config(30));
    while (!sim.finished()) {
        sim.step();
        for (const auto& [k, f] : sim.tallies()) {
            CHECK(f.emitted_packets == f.delivered_packets);
            CHECK(f.dropped_packets == 0);
        }
    }
}

TEST_CASE("run polls every interval and the last poll lands on the duration") {
    const Topology t = Topology::build_grid(3, 4, 3);
    const auto record = run(t, RuleTable{}, profiles({{NodeId::host(2, 0), 2.0}}), config(60, 5));
    REQUIRE(record.polls.size() == 12);
    CHECK(record.polls.front().time == 5.0);
    CHECK(record.polls.back().time == 60.0);
    // One client, two edge switches, two directions.
    for (const auto& p : record.polls) CHECK(p.samples.size() == 4);
}

TEST_CASE("zero duration produces an empty record") {
    const Topology t = Topology::build_grid(2, 2, 1);
    const auto record = run(t, RuleTable{}, profiles({{NodeId::host(1, 0), 2.0}}), config(0));
    CHECK(record.polls.empty());
    CHECK(record.tallies.empty());
}

TEST_CASE("same seed, same run; different seed, different dither") {
    const Topology t = Topology::build_grid(3, 4, 3);
    auto prof = profiles({{NodeId::host(1, 0), 0.7}, {NodeId::host(4, 2), 1.3}});
    const auto a = run(t, RuleTable{}, prof, config(30, 5, 42));
    const auto b = run(t, RuleTable{}, prof, config(30, 5, 42));
    CHECK(a.stat_log() == b.stat_log());
    CHECK(a.tallies == b.tallies);
    CHECK(a.events == b.events);
    std::vector<std::vector<StatSample>> logs;
    for (std::uint64_t seed = 1; seed <= 8; ++seed)
        logs.push_back(run(t, RuleTable{}, prof, config(30, 5, seed)).stat_log());
    CHECK(std::any_of(logs.begin(), logs.end(), [&](const auto& l) { return l != logs.front(); }));
}

TEST_CASE("constrained link: per-tick budget and exact conservation") {
    const Topology base = Topology::build_grid(2, 2, 2);
    const NodeId attacker = NodeId::host(2, 1);
    const FlowKey k = key(attacker, kServer);
    std::map<NodeId, TrafficProfile> prof{
        {kServer, TrafficProfile{ProfileKind::Server, 0, 1000, 1000}},
        {attacker, TrafficProfile{ProfileKind::Attacker, 1000.0, 1000, 1000}}};
    Simulation sim(base, RuleTable{}, prof, config(20));
    sim.step();  // installs the path

    DetectionReport report;
    report.target = host_address(0, 0);
    report.attack = true;
    report.suspicious_sources = {k.src};
    const auto plan = plan_scrubber(report, sim.topology(), sim.rules());
    auto applied = apply(plan, sim.topology(), sim.rules());
    sim.reconfigure(std::move(applied.topology), std::move(applied.rules), applied.removed);

    const std::uint64_t budget = static_cast<std::uint64_t>(kScrubberLinkLimit.capacity_bytes_per_s);
    while (!sim.finished()) {
        sim.step();
        REQUIRE(sim.link_states().size() == 1);
        const LinkState& link = sim.link_states().front();
        CHECK(link.last_tick_delivered_bytes <= budget);
        CHECK(link.queued_packets <= 1000);
        CHECK(link.arrived_packets ==
              link.delivered_packets + link.queued_packets + link.dropped_packets);
        CHECK(conserved(sim.tallies().at(k), sim.queued_packets(k)));
    }
    const LinkState& link = sim.link_states().front();
    // 12 whole 1000-byte packets fit into each tick's budget.
    CHECK(link.delivered_packets == 12 * 19);
    CHECK(link.dropped_packets > 0);
}
