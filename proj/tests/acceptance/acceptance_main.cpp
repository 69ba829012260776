// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <set>
#include <string>

#include "sdnsim/analytics.hpp"
#include "sdnsim/routing.hpp"
#include "sdnsim/scenario.hpp"
#include "support/oracles.hpp"

using namespace sdnsim;
using Clock = std::chrono::steady_clock;

namespace {

// Tolerances and budgets.
constexpr double kFastBudgetSeconds = 1.0;      // criteria 1 and 2
constexpr double kSuiteBudgetSeconds = 60.0;    // criterion 9
constexpr double kDetectionLagSeconds = 10.0;   // two poll intervals
constexpr double kMeanRelTolerance = 0.10;      // criterion 5
constexpr double kThrottleBytesPerSecond = 12'500.0;
constexpr double kWcssSlack = 1e-9;

struct Verdict {
    bool pass = true;
    std::string detail;
    void require(bool ok, const std::string& what) {
        if (!ok && pass) detail = what;
        pass = pass && ok;
    }
};

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

Verdict topology_exactness() {
    Verdict v;
    const auto start = Clock::now();
    const Topology t = Topology::build_grid(3, 4, 3);
    v.require(t.count(NodeKind::CoreSwitch) == 12 && t.count(NodeKind::EdgeSwitch) == 10 &&
                  t.count(NodeKind::Host) == 30,
              "grid(3,4,3) counts");
    int sizes = 0;
    for (int n = 2; n <= 6; ++n)
        for (int m = 2; m <= 6; ++m)
            for (int k = 1; k <= 4; ++k) {
                const Topology g = Topology::build_grid(n, m, k);
                const auto edges = static_cast<std::size_t>(2 * n + 2 * m - 4);
                v.require(g.count(NodeKind::CoreSwitch) == static_cast<std::size_t>(n * m) &&
                              g.count(NodeKind::EdgeSwitch) == edges &&
                              g.count(NodeKind::Host) == edges * static_cast<std::size_t>(k),
                          "sweep mismatch at " + std::to_string(n) + "x" + std::to_string(m));
                ++sizes;
            }
    const double elapsed = seconds_since(start);
    v.require(elapsed < kFastBudgetSeconds, "runtime " + std::to_string(elapsed) + " s");
    if (v.pass) v.detail = std::to_string(sizes) + " grid sizes exact, " + std::to_string(elapsed) + " s";
    return v;
}

Verdict routing_optimality() {
    Verdict v;
    const auto start = Clock::now();
    const Topology t = Topology::build_grid(4, 4, 2);
    const auto hosts = t.nodes_of(NodeKind::Host);
    oracle::Normal rng(2);
    int mismatches = 0;
    for (int i = 0; i < 200; ++i) {
        const NodeId a = hosts[rng.bits() % hosts.size()];
        NodeId b = a;
        while (b == a) b = hosts[rng.bits() % hosts.size()];
        const auto path = shortest_path(t, a, b);
        if (static_cast<int>(path.size()) - 1 != oracle::bfs_distances(t, a).at(b)) ++mismatches;
    }
    v.require(mismatches == 0, std::to_string(mismatches) + " hop-count mismatches");

    RuleTable rules;
    for (int i = 0; i < 100; ++i) {
        const NodeId a = hosts[rng.bits() % hosts.size()];
        NodeId b = a;
        while (b == a) b = hosts[rng.bits() % hosts.size()];
        handle_packet_in(rules, t, FlowKey{*t.address_of(a), *t.address_of(b)});
    }
    std::map<std::pair<NodeId, Ipv4>, std::set<Port>> ports;
    for (const auto& [sw, list] : rules.tables())
        for (const FlowRule& r : list) ports[{sw, r.match_dst}].insert(r.out_port);
    const bool tree = std::all_of(ports.begin(), ports.end(), [](const auto& e) { return e.second.size() == 1; });
    v.require(tree, "a switch forwards one destination through two ports");

    const double elapsed = seconds_since(start);
    v.require(elapsed < kFastBudgetSeconds, "runtime " + std::to_string(elapsed) + " s");
    if (v.pass) v.detail = "200 pairs, 0 mismatches; tree holds over 100 flows, " + std::to_string(elapsed) + " s";
    return v;
}

Verdict counter_conservation() {
    Verdict v;
    const ScenarioConfig c;  // reference scenario, no attackers
    const auto outcome = execute_scenario(c);
    const auto ingress = ingress_edges(outcome.setup.topology);

    std::map<FlowKey, std::pair<std::uint64_t, std::uint64_t>> sums;
    for (const auto& p : outcome.record.polls)
        for (const auto& d : p.deltas) {
            sums[{d.src, d.dst}].first += d.d_packets;
            sums[{d.src, d.dst}].second += d.d_bytes;
        }
    std::map<FlowKey, std::pair<std::uint64_t, std::uint64_t>> finals;
    for (const auto& s : outcome.record.polls.back().samples)
        if (ingress.at(s.src) == s.sw) finals[{s.src, s.dst}] = {s.packets_total, s.bytes_total};

    v.require(!sums.empty() && sums == finals, "sum of deltas differs from final totals");
    for (const auto& [key, tally] : outcome.record.tallies) {
        v.require(tally.emitted_packets == tally.delivered_packets &&
                      tally.emitted_bytes == tally.delivered_bytes,
                  "loss on " + key.src.to_string() + "->" + key.dst.to_string());
        v.require(sums.count(key) && sums[key].first == tally.emitted_packets,
                  "telemetry misses emitted packets");
    }
    if (v.pass)
        v.detail = std::to_string(sums.size()) + " flows: deltas telescope exactly, emitted = delivered";
    return v;
}

Verdict clustering_recovery() {
    Verdict v;
    constexpr double sigma = 1.0;
    constexpr double separation = 6.0 * sigma;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        oracle::Normal rng(seed * 7919);
        std::vector<FeatureVector> f;
        std::vector<int> label;
        for (int i = 0; i < 30; ++i) {
            const bool second = i >= 20;
            // Offset on every axis so centers are `separation` apart in 4-D.
            const double c = second ? separation / 2.0 : 0.0;
            f.push_back(FeatureVector{Ipv4(10, 9, 0, static_cast<std::uint8_t>(i)), rng(50 + c, sigma),
                                      rng(50 + c, sigma), rng(50 + c, sigma), rng(50 + c, sigma)});
            label.push_back(second ? 1 : 0);
        }
        const auto cl = kmeans(f, KMeansOptions{2, seed, 100});
        bool agree = cl.k == 2;
        for (std::size_t i = 0; agree && i < f.size(); ++i)
            for (std::size_t j = 0; j < f.size(); ++j)
                if ((cl.assignment[i] == cl.assignment[j]) != (label[i] == label[j])) {
                    agree = false;
                    break;
                }
        v.require(agree, "label disagreement at seed " + std::to_string(seed));
        for (std::size_t i = 1; i < cl.wcss_history.size(); ++i)
            v.require(cl.wcss_history[i] <= cl.wcss_history[i - 1] + kWcssSlack,
                      "WCSS increased at seed " + std::to_string(seed));
    }
    if (v.pass) v.detail = "20/20 seeds with 100% label agreement; WCSS monotone";
    return v;
}

Verdict gaussian_decomposition() {
    Verdict v;
    oracle::Normal rng(1000);
    std::vector<double> mix;
    for (int i = 0; i < 500; ++i) mix.push_back(rng(10, 1));
    for (int i = 0; i < 500; ++i) mix.push_back(rng(30, 2));
    const auto d = decompose_gaussian_1d(mix, DecomposeOptions{silverman_bandwidth(mix)});
    v.require(d.components.size() == 2, std::to_string(d.components.size()) + " mixture components");
    if (d.components.size() == 2) {
        v.require(std::abs(d.components[0].mean - 10) <= kMeanRelTolerance * 10, "low mean off");
        v.require(std::abs(d.components[1].mean - 30) <= kMeanRelTolerance * 30, "high mean off");
        v.require(d.boundaries.size() == 1 && d.boundaries[0] > 15 && d.boundaries[0] < 25,
                  "boundary outside (15, 25)");
    }
    std::vector<double> single;
    for (int i = 0; i < 1000; ++i) single.push_back(rng(20, 2));
    const auto s = decompose_gaussian_1d(single, DecomposeOptions{silverman_bandwidth(single)});
    v.require(s.components.size() == 1, std::to_string(s.components.size()) + " single-Gaussian components");
    if (v.pass) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "means %.2f / %.2f, boundary %.2f; single input -> 1 component",
                      d.components[0].mean, d.components[1].mean, d.boundaries[0]);
        v.detail = buf;
    }
    return v;
}

Verdict end_to_end_detection() {
    Verdict v;
    std::string summary;
    for (int k : {2, 5}) {
        ScenarioConfig c = *config_template("attack");
        c.k_clusters = k;
        const auto outcome = execute_scenario(c);
        const std::set<Ipv4> attackers(c.attackers.begin(), c.attackers.end());
        const double threshold = c.effective_threshold();

        std::optional<double> exceeded;
        const PollAnalysis* verdict = nullptr;
        for (const auto& a : outcome.analyses) {
            if (!exceeded && a.aggregate_byte_rate > threshold) exceeded = a.time;
            if (!verdict && a.detection.attack) verdict = &a;
        }
        const std::string tag = "k=" + std::to_string(k) + ": ";
        v.require(exceeded.has_value(), tag + "aggregate never exceeded the threshold");
        v.require(verdict != nullptr, tag + "no attack verdict");
        if (!exceeded || !verdict) continue;
        v.require(verdict->time - *exceeded <= kDetectionLagSeconds, tag + "verdict too late");
        v.require(verdict->time - c.attack_start <= kDetectionLagSeconds, tag + "verdict too late after start");
        const std::set<Ipv4> flagged(verdict->detection.suspicious_sources.begin(),
                                     verdict->detection.suspicious_sources.end());
        v.require(flagged == attackers, tag + "suspicious sources differ from the attacker set");
        char buf[96];
        std::snprintf(buf, sizeof buf, "%sverdict at t=%g (exceeded t=%g), %zu/%zu sources; ", tag.c_str(),
                      verdict->time, *exceeded, flagged.size(), attackers.size());
        summary += buf;
    }
    if (v.pass) v.detail = summary + "precision = recall = 1";
    return v;
}

Verdict mitigation_effectiveness() {
    Verdict v;
    const ScenarioConfig c = *config_template("attack");
    ScenarioConfig control_cfg = c;
    control_cfg.mitigation = false;

    std::map<FlowKey, std::uint64_t> previous;
    double worst_rate = 0.0;
    double worst_total = 0.0;  // all scrubbed flows share one throttled link
    std::set<FlowKey> scrubbed;
    std::optional<RuleTable> final_rules;
    std::optional<Topology> final_topology;
    const auto observer = [&](const Simulation& sim) {
        if (scrubbed.empty() && sim.topology().count(NodeKind::ScrubberSwitch) > 0)
            for (const auto& [key, tally] : sim.tallies())
                if (sim.topology().role_of(*sim.topology().host_at(key.src)) == HostRole::Attacker)
                    scrubbed.insert(key);
        double tick_total = 0.0;
        for (const auto& [key, tally] : sim.tallies()) {
            const auto it = previous.find(key);
            const std::uint64_t before = it == previous.end() ? 0 : it->second;
            if (scrubbed.count(key)) {
                const double rate = static_cast<double>(tally.delivered_bytes - before) / sim.config().tick;
                worst_rate = std::max(worst_rate, rate);
                tick_total += rate;
            }
            previous[key] = tally.delivered_bytes;
        }
        worst_total = std::max(worst_total, tick_total);
        if (sim.finished()) {
            final_rules = sim.rules();
            final_topology = sim.topology();
        }
    };
    const auto mitigated = execute_scenario(c, observer);
    const auto control = execute_scenario(control_cfg);

    v.require(mitigated.mitigation.has_value(), "no mitigation applied");
    v.require(!scrubbed.empty(), "no scrubbed flows observed");
    v.require(worst_rate <= kThrottleBytesPerSecond,
              "scrubbed flow delivered " + std::to_string(worst_rate) + " B/s");
    v.require(worst_total <= kThrottleBytesPerSecond,
              "scrubbed flows together delivered " + std::to_string(worst_total) + " B/s");

    std::size_t legit = 0;
    for (const auto& [key, tally] : control.record.tallies) {
        const NodeId src = *control.setup.topology.host_at(key.src);
        const NodeId dst = *control.setup.topology.host_at(key.dst);
        if (control.setup.topology.role_of(src) == HostRole::Attacker ||
            control.setup.topology.role_of(dst) == HostRole::Attacker)
            continue;
        ++legit;
        const auto it = mitigated.record.tallies.find(key);
        v.require(it != mitigated.record.tallies.end() && it->second.delivered_packets == tally.delivered_packets &&
                      it->second.delivered_bytes == tally.delivered_bytes,
                  "legit flow " + key.src.to_string() + "->" + key.dst.to_string() + " differs from control");
    }

    std::size_t walked = 0;
    if (final_rules && final_topology)
        for (const auto& [key, tally] : mitigated.record.tallies) {
            const auto w = oracle::walk(*final_topology, *final_rules, key);
            v.require(!w.looped && w.delivered, "path walk of " + key.src.to_string() + " did not terminate");
            ++walked;
        }
    v.require(walked > 0, "no final rule table captured");

    if (v.pass) {
        char buf[240];
        std::snprintf(buf, sizeof buf,
                      "%zu scrubbed flows, peak %.0f B/s per flow, %.0f B/s combined <= %.0f; %zu legit flows match control; %zu walks loop-free",
                      scrubbed.size(), worst_rate, worst_total, kThrottleBytesPerSecond, legit, walked);
        v.detail = buf;
    }
    return v;
}

Verdict determinism() {
    Verdict v;
    for (const char* name : {"reference", "attack"}) {
        ScenarioConfig c = *config_template(name);
        c.seed = 20261015;
        c.base_rate = 1.7;  // fractional rates exercise the seeded dither
        const auto a = execute_scenario(c);
        const auto b = execute_scenario(c);
        v.require(a.stats_csv() == b.stats_csv(), std::string(name) + ": CSV differs");
        v.require(a.report_text() == b.report_text(), std::string(name) + ": report differs");
    }
    if (v.pass) v.detail = "CSV and report byte-identical across repeat runs";
    return v;
}

}  // namespace

int main() {
    const auto suite_start = Clock::now();
    struct Criterion {
        const char* name;
        std::function<Verdict()> check;
    };
    const std::vector<Criterion> criteria{
        {"topology exactness", topology_exactness},
        {"routing optimality", routing_optimality},
        {"counter conservation", counter_conservation},
        {"clustering recovery", clustering_recovery},
        {"gaussian decomposition", gaussian_decomposition},
        {"end-to-end detection", end_to_end_detection},
        {"mitigation effectiveness", mitigation_effectiveness},
        {"determinism", determinism},
    };

    int failures = 0;
    int index = 1;
    for (const auto& c : criteria) {
        Verdict v;
        try {
            v = c.check();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail = std::string("exception: ") + e.what();
        }
        failures += v.pass ? 0 : 1;
        std::printf("[%s] %d. %s: %s\n", v.pass ? "PASS" : "FAIL", index++, c.name, v.detail.c_str());
    }
    const double total = seconds_since(suite_start);
    const bool fast = total < kSuiteBudgetSeconds;
    failures += fast ? 0 : 1;
    std::printf("[%s] 9. suite runtime: %.2f s (budget %.0f s)\n", fast ? "PASS" : "FAIL", total,
                kSuiteBudgetSeconds);
    return failures == 0 ? 0 : 1;
}
