#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "sdnsim/counters.hpp"
#include "sdnsim/routing.hpp"
#include "sdnsim/telemetry.hpp"
#include "sdnsim/topology.hpp"

namespace sdnsim {

enum class ProfileKind : std::uint8_t { LegitClient, Attacker, Server };

struct TrafficProfile {
    ProfileKind kind = ProfileKind::LegitClient;
    double request_rate = 0.0;        // requests/s, clients only
    std::uint32_t request_size = 200;  // bytes
    std::uint32_t response_size = 1000;
};

struct SimConfig {
    double tick = 1.0;
    double duration = 60.0;
    std::uint64_t seed = 1;
    double attack_start = 0.0;
    double poll_interval = 5.0;

    /// Throws UsageError unless tick > 0 and duration and poll_interval are
    /// whole multiples of tick.
    void validate() const;
    long total_ticks() const;
    long ticks_per_poll() const;
};

/// Rate of the legitimate client at (row, col) of the K x K client matrix.
double legit_rate(int row, int col, int k, double base);

/// Per-flow traffic accounting. Conservation per flow:
/// emitted = delivered + queued + dropped + missed.
struct FlowTally {
    std::uint64_t emitted_packets = 0;
    std::uint64_t emitted_bytes = 0;
    std::uint64_t delivered_packets = 0;
    std::uint64_t delivered_bytes = 0;
    std::uint64_t dropped_packets = 0;
    std::uint64_t dropped_bytes = 0;
    std::uint64_t missed_packets = 0;

    bool operator==(const FlowTally&) const = default;
};

/// Packets of one flow travelling together.
struct Batch {
    FlowKey key;
    std::uint64_t packets = 0;
    std::uint32_t size = 0;
    bool operator==(const Batch&) const = default;
};

/// Batch waiting on a constrained link and the endpoint it will leave by.
struct QueuedBatch {
    Batch batch;
    Endpoint exit;
    bool operator==(const QueuedBatch&) const = default;
};

/// FIFO and tallies of one constrained link, serviced once per tick.
/// Invariant: arrived = delivered + queued + dropped.
struct LinkState {
    std::size_t link_index = 0;
    std::deque<QueuedBatch> queue;
    std::uint64_t queued_packets = 0;
    std::uint64_t arrived_packets = 0;
    std::uint64_t delivered_packets = 0;
    std::uint64_t delivered_bytes = 0;
    std::uint64_t dropped_packets = 0;
    std::uint64_t last_tick_delivered_bytes = 0;

    bool operator==(const LinkState&) const = default;
};

struct Event {
    double time = 0.0;
    std::string kind;
    std::string detail;
    bool operator==(const Event&) const = default;
};

/// Tick-synchronous traffic engine. Clients send requests to the single
/// Server host; the server answers every delivered request in the same tick.
/// Packet-in is handled synchronously by the embedded controller.
class Simulation {
public:
    /// Profiles are keyed by host. Exactly one Server profile is required and
    /// every profiled node must be a host. Throws UsageError otherwise.
    Simulation(Topology topology, RuleTable rules, std::map<NodeId, TrafficProfile> profiles,
               SimConfig cfg);

    void step();
    bool finished() const { return ticks_done_ >= cfg_.total_ticks(); }
    double now() const { return static_cast<double>(ticks_done_) * cfg_.tick; }
    long ticks_done() const { return ticks_done_; }
    bool at_poll_boundary() const;

    const SimConfig& config() const { return cfg_; }
    const Topology& topology() const { return topology_; }
    const RuleTable& rules() const { return rules_; }
    const CounterSet& counters() const { return counters_; }
    const std::map<FlowKey, FlowTally>& tallies() const { return tallies_; }
    const std::vector<LinkState>& link_states() const { return links_; }
    const std::vector<Event>& events() const { return events_; }
    NodeId server() const { return server_; }
    Ipv4 server_address() const { return server_address_; }

    /// Packets of `key` currently waiting in constrained-link queues.
    std::uint64_t queued_packets(const FlowKey& key) const;

    /// Swaps in new controller state between ticks. Counters of removed
    /// per-flow rules are retired so polled totals stay monotone.
    void reconfigure(Topology topology, RuleTable rules, const std::vector<FlowRule>& removed);

    void log(std::string kind, std::string detail);

private:
    struct Host {
        NodeId id;
        Ipv4 address;
        TrafficProfile profile;
        double residue = 0.0;
    };

    /// Sends a batch out of `out`, following rules until it is delivered,
    /// queued on a constrained link, or misses.
    void send(const Batch& batch, Endpoint out);
    void arrive(const Batch& batch, Endpoint at);
    void service_links();
    void deliver(const Batch& batch, const NodeId& host);
    void sync_link_states();

    SimConfig cfg_;
    Topology topology_;
    RuleTable rules_;
    CounterSet counters_;
    std::vector<Host> clients_;
    NodeId server_;
    Ipv4 server_address_;
    TrafficProfile server_profile_;
    std::map<FlowKey, FlowTally> tallies_;
    std::vector<LinkState> links_;
    std::map<FlowKey, std::uint64_t> delivered_requests_;  // this tick
    std::vector<Event> events_;
    long ticks_done_ = 0;
};

/// One telemetry poll and the deltas it produced.
struct PollRecord {
    double time = 0.0;
    std::vector<StatSample> samples;
    std::vector<DeltaRecord> deltas;
};

struct RunRecord {
    std::vector<PollRecord> polls;
    std::vector<Event> events;
    std::map<FlowKey, FlowTally> tallies;
    std::vector<StatSample> stat_log() const;
};

/// Called after each poll, between ticks. May reconfigure the simulation.
using PollHook = std::function<void(Simulation&, const PollRecord&)>;

/// Called after every tick, before any poll at that instant.
using TickHook = std::function<void(const Simulation&)>;

/// Runs to completion, polling every poll_interval.
RunRecord run(Simulation& sim, const PollHook& on_poll = {}, const TickHook& on_tick = {});
RunRecord run(const Topology& topology, const RuleTable& rules,
              const std::map<NodeId, TrafficProfile>& profiles, const SimConfig& cfg,
              const PollHook& on_poll = {});

/// Address -> ingress edge switch for every host.
std::map<Ipv4, NodeId> ingress_edges(const Topology& topology);

}  // namespace sdnsim
