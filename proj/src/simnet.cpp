#include "sdnsim/simnet.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "sdnsim/error.hpp"

namespace sdnsim {

void CounterSet::add(std::uint64_t cookie, std::uint64_t packets, std::uint64_t bytes_each) {
    Counter& c = live_[cookie];
    c.packets += packets;
    c.bytes += packets * bytes_each;
}

Counter CounterSet::get(std::uint64_t cookie) const {
    auto it = live_.find(cookie);
    return it == live_.end() ? Counter{} : it->second;
}

void CounterSet::retire(const FlowRule& rule) {
    auto it = live_.find(rule.cookie);
    if (it == live_.end()) return;
    if (rule.match_src) retired_[FlowSlot{rule.at, *rule.match_src, rule.match_dst}] += it->second;
    live_.erase(it);
}

Counter CounterSet::retired(const FlowSlot& slot) const {
    auto it = retired_.find(slot);
    return it == retired_.end() ? Counter{} : it->second;
}

namespace {

bool is_multiple(double value, double step) {
    const double ratio = value / step;
    return std::abs(ratio - std::round(ratio)) <= 1e-9 * std::max(1.0, ratio);
}

}  // namespace

void SimConfig::validate() const {
    if (!(tick > 0.0)) throw UsageError("tick must be positive");
    if (duration < 0.0) throw UsageError("duration must be non-negative");
    if (!(poll_interval > 0.0)) throw UsageError("poll_interval must be positive");
    if (!is_multiple(duration, tick)) throw UsageError("duration must be a multiple of tick");
    if (!is_multiple(poll_interval, tick))
        throw UsageError("poll_interval must be a multiple of tick");
}

long SimConfig::total_ticks() const { return std::lround(duration / tick); }
long SimConfig::ticks_per_poll() const { return std::lround(poll_interval / tick); }

double legit_rate(int row, int col, int k, double base) {
    if (row < 0 || col < 0 || row >= k || col >= k)
        throw UsageError("client matrix index out of range");
    return base * static_cast<double>(row + col + 1);
}

Simulation::Simulation(Topology topology, RuleTable rules,
                       std::map<NodeId, TrafficProfile> profiles, SimConfig cfg)
    : cfg_(cfg), topology_(std::move(topology)), rules_(std::move(rules)) {
    cfg_.validate();

    std::mt19937_64 rng(cfg_.seed);
    bool have_server = false;
    for (const auto& [id, profile] : profiles) {
        if (id.kind != NodeKind::Host || !topology_.contains(id))
            throw UsageError("traffic profile for non-host " + id.name());
        if (profile.request_rate < 0.0) throw UsageError("negative request rate at " + id.name());
        if (profile.request_size == 0 || profile.response_size == 0)
            throw UsageError("packet sizes must be positive at " + id.name());
        if (profile.kind == ProfileKind::Server) {
            if (have_server) throw UsageError("more than one server profile");
            have_server = true;
            server_ = id;
            server_address_ = *topology_.address_of(id);
            server_profile_ = profile;
            continue;
        }
        // Initial dither phase in [0, 1) from the top 53 bits.
        const double phase = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        clients_.push_back(Host{id, *topology_.address_of(id), profile, phase});
    }
    if (!have_server) throw UsageError("no server profile");
    sync_link_states();
}

bool Simulation::at_poll_boundary() const {
    return ticks_done_ > 0 && ticks_done_ % cfg_.ticks_per_poll() == 0;
}

void Simulation::log(std::string kind, std::string detail) {
    events_.push_back(Event{now(), std::move(kind), std::move(detail)});
}

void Simulation::sync_link_states() {
    const auto& links = topology_.links();
    for (std::size_t i = 0; i < links.size(); ++i) {
        if (!links[i].constrained()) continue;
        const bool tracked = std::any_of(links_.begin(), links_.end(),
                                         [i](const LinkState& s) { return s.link_index == i; });
        if (tracked) continue;
        LinkState state;
        state.link_index = i;
        links_.push_back(std::move(state));
    }
}

void Simulation::reconfigure(Topology topology, RuleTable rules,
                             const std::vector<FlowRule>& removed) {
    for (const LinkState& state : links_)
        if (state.link_index >= topology.links().size() ||
            topology.links()[state.link_index] != topology_.links()[state.link_index])
            throw UsageError("reconfigure may only append links");
    topology_ = std::move(topology);
    rules_ = std::move(rules);
    for (const FlowRule& r : removed) counters_.retire(r);
    sync_link_states();
}

std::uint64_t Simulation::queued_packets(const FlowKey& key) const {
    std::uint64_t n = 0;
    for (const LinkState& state : links_)
        for (const QueuedBatch& q : state.queue)
            if (q.batch.key == key) n += q.batch.packets;
    return n;
}

void Simulation::send(const Batch& batch, Endpoint out) {
    auto index = topology_.link_at(out);
    if (!index) {
        tallies_[batch.key].missed_packets += batch.packets;
        return;
    }
    const Link& link = topology_.links()[*index];
    const Endpoint peer = link.peer_of(out);
    if (link.constrained()) {
        for (LinkState& state : links_) {
            if (state.link_index != *index) continue;
            state.queue.push_back(QueuedBatch{batch, peer});
            state.queued_packets += batch.packets;
            state.arrived_packets += batch.packets;
            return;
        }
        throw InvariantViolation("untracked constrained link");
    }
    arrive(batch, peer);
}

void Simulation::arrive(const Batch& batch, Endpoint at) {
    const std::size_t hop_limit = topology_.node_count();
    for (std::size_t hops = 0;; ++hops) {
        if (hops > hop_limit)
            throw InvariantViolation("forwarding loop for " + batch.key.src.to_string() + "->" +
                                     batch.key.dst.to_string());
        if (at.node.kind == NodeKind::Host) {
            deliver(batch, at.node);
            return;
        }
        const FlowRule* rule = rules_.lookup(at.node, batch.key, at.port);
        if (!rule) {
            // Only the ingress edge switch raises packet-in.
            const auto src_host = topology_.host_at(batch.key.src);
            if (src_host && at.node == topology_.edge_of(*src_host) &&
                topology_.port_toward(at.node, *src_host) == at.port) {
                const PacketInResult installed = handle_packet_in(rules_, topology_, batch.key);
                log("packet_in", batch.key.src.to_string() + "->" + batch.key.dst.to_string() +
                                     " rules=" + std::to_string(installed.written.size()));
                rule = rules_.lookup(at.node, batch.key, at.port);
            }
        }
        if (!rule) {
            tallies_[batch.key].missed_packets += batch.packets;
            log("miss", at.node.name() + " " + batch.key.src.to_string() + "->" +
                            batch.key.dst.to_string());
            return;
        }
        counters_.add(rule->cookie, batch.packets, batch.size);

        const Endpoint out{at.node, rule->out_port};
        auto index = topology_.link_at(out);
        if (!index) {
            tallies_[batch.key].missed_packets += batch.packets;
            return;
        }
        const Link& link = topology_.links()[*index];
        if (link.constrained()) {
            send(batch, out);
            return;
        }
        at = link.peer_of(out);
    }
}

void Simulation::deliver(const Batch& batch, const NodeId& host) {
    if (topology_.address_of(host) != batch.key.dst)
        throw InvariantViolation("misdelivered " + batch.key.src.to_string() + "->" +
                                 batch.key.dst.to_string() + " to " + host.name());
    FlowTally& tally = tallies_[batch.key];
    tally.delivered_packets += batch.packets;
    tally.delivered_bytes += batch.packets * batch.size;
    if (host == server_) delivered_requests_[batch.key] += batch.packets;
}

void Simulation::service_links() {
    for (std::size_t i = 0; i < links_.size(); ++i) {
        const Link& link = topology_.links()[links_[i].link_index];
        const auto budget =
            static_cast<std::uint64_t>(std::floor(link.limit->capacity_bytes_per_s * cfg_.tick));
        std::uint64_t used = 0;
        std::vector<QueuedBatch> released;
        {
            LinkState& state = links_[i];
            while (!state.queue.empty()) {
                QueuedBatch& head = state.queue.front();
                const std::uint64_t fit = (budget - used) / head.batch.size;
                if (fit == 0) break;
                const std::uint64_t take = std::min(fit, head.batch.packets);
                QueuedBatch part = head;
                part.batch.packets = take;
                released.push_back(part);
                used += take * head.batch.size;
                head.batch.packets -= take;
                if (head.batch.packets == 0) state.queue.pop_front();
                state.queued_packets -= take;
                state.delivered_packets += take;
            }
            state.delivered_bytes += used;
            state.last_tick_delivered_bytes = used;

            // Tail drop down to the queue cap.
            const auto cap = static_cast<std::uint64_t>(link.limit->queue_cap_packets);
            while (state.queued_packets > cap) {
                QueuedBatch& tail = state.queue.back();
                const std::uint64_t drop = std::min(state.queued_packets - cap, tail.batch.packets);
                FlowTally& tally = tallies_[tail.batch.key];
                tally.dropped_packets += drop;
                tally.dropped_bytes += drop * tail.batch.size;
                tail.batch.packets -= drop;
                state.queued_packets -= drop;
                state.dropped_packets += drop;
                if (tail.batch.packets == 0) state.queue.pop_back();
            }
        }
        // Released batches may re-enter this queue, so forward them after servicing.
        for (const QueuedBatch& q : released) arrive(q.batch, q.exit);
    }
}

void Simulation::step() {
    if (finished()) throw UsageError("simulation already finished");
    const double t = now();

    for (Host& client : clients_) {
        const bool active = client.profile.kind == ProfileKind::LegitClient ||
                            (client.profile.kind == ProfileKind::Attacker && t >= cfg_.attack_start);
        if (!active) continue;
        client.residue += client.profile.request_rate * cfg_.tick;
        const double whole = std::floor(client.residue);
        client.residue -= whole;
        const auto count = static_cast<std::uint64_t>(whole);
        if (count == 0) continue;

        const Batch batch{FlowKey{client.address, server_address_}, count,
                          client.profile.request_size};
        FlowTally& tally = tallies_[batch.key];
        tally.emitted_packets += count;
        tally.emitted_bytes += count * batch.size;
        send(batch, Endpoint{client.id, kHostUplinkPort});
    }

    service_links();

    const auto requests = std::exchange(delivered_requests_, {});
    for (const auto& [key, count] : requests) {
        const Batch batch{key.reversed(), count, server_profile_.response_size};
        FlowTally& tally = tallies_[batch.key];
        tally.emitted_packets += count;
        tally.emitted_bytes += count * batch.size;
        send(batch, Endpoint{server_, kHostUplinkPort});
    }

    ++ticks_done_;
}

std::map<Ipv4, NodeId> ingress_edges(const Topology& topology) {
    std::map<Ipv4, NodeId> out;
    for (const auto& [address, host] : topology.ip_map()) out.emplace(address, topology.edge_of(host));
    return out;
}

std::vector<StatSample> RunRecord::stat_log() const {
    std::vector<StatSample> all;
    for (const PollRecord& p : polls) all.insert(all.end(), p.samples.begin(), p.samples.end());
    return all;
}

RunRecord run(Simulation& sim, const PollHook& on_poll, const TickHook& on_tick) {
    RunRecord record;
    StatStore store(ingress_edges(sim.topology()));
    while (!sim.finished()) {
        sim.step();
        if (on_tick) on_tick(sim);
        if (!sim.at_poll_boundary()) continue;
        PollRecord p;
        p.time = sim.now();
        p.samples = poll(sim.rules(), sim.counters(), p.time);
        p.deltas = delta(store, p.samples, p.time);
        record.polls.push_back(std::move(p));
        if (on_poll) on_poll(sim, record.polls.back());
    }
    record.events = sim.events();
    record.tallies = sim.tallies();
    return record;
}

RunRecord run(const Topology& topology, const RuleTable& rules,
              const std::map<NodeId, TrafficProfile>& profiles, const SimConfig& cfg,
              const PollHook& on_poll) {
    Simulation sim(topology, rules, profiles, cfg);
    return run(sim, on_poll);
}

}  // namespace sdnsim
