#include "sdnsim/report.hpp"

#include "sdnsim/error.hpp"

namespace sdnsim {

using nlohmann::json;

namespace {

json point_json(const Point& p) { return json::array({p[0], p[1], p[2], p[3]}); }

json link_json(const Link& link) {
    json j{{"a", link.a.node.name()},
           {"a_port", link.a.port.number},
           {"b", link.b.node.name()},
           {"b_port", link.b.port.number}};
    if (link.limit) {
        j["capacity_bytes_per_s"] = link.limit->capacity_bytes_per_s;
        j["queue_cap_packets"] = link.limit->queue_cap_packets;
    }
    return j;
}

}  // namespace

json to_json(const Topology& topology) {
    json nodes = json::array();
    for (const NodeId& id : topology.nodes()) {
        json n{{"id", id.name()}, {"kind", std::string(to_string(id.kind))}};
        if (auto ip = topology.address_of(id)) n["ip"] = ip->to_string();
        if (id.kind == NodeKind::Host) n["role"] = std::string(to_string(topology.role_of(id)));
        nodes.push_back(std::move(n));
    }
    json links = json::array();
    for (const Link& link : topology.links()) links.push_back(link_json(link));
    return json{{"grid", {{"n", topology.grid_rows()}, {"m", topology.grid_cols()},
                          {"k", topology.hosts_per_edge()}}},
                {"nodes", std::move(nodes)},
                {"links", std::move(links)}};
}

json to_json(const FlowRule& rule) {
    json j{{"switch", rule.at.name()},
           {"match_src", rule.match_src ? json(rule.match_src->to_string()) : json(nullptr)},
           {"match_dst", rule.match_dst.to_string()},
           {"out_port", rule.out_port.number},
           {"priority", rule.priority}};
    if (rule.in_port) j["in_port"] = rule.in_port->number;
    return j;
}

json to_json(const DeltaRecord& d) {
    return json{{"interval_end", d.interval_end}, {"src", d.src.to_string()},
                {"dst", d.dst.to_string()},       {"d_packets", d.d_packets},
                {"d_bytes", d.d_bytes},           {"interval", d.interval}};
}

std::vector<DeltaRecord> deltas_from_json(const json& array) {
    std::vector<DeltaRecord> out;
    for (const json& j : array) {
        DeltaRecord d;
        d.interval_end = j.at("interval_end").get<double>();
        auto src = Ipv4::parse(j.at("src").get<std::string>());
        auto dst = Ipv4::parse(j.at("dst").get<std::string>());
        if (!src || !dst) throw UsageError("bad address in delta record");
        d.src = *src;
        d.dst = *dst;
        d.d_packets = j.at("d_packets").get<std::uint64_t>();
        d.d_bytes = j.at("d_bytes").get<std::uint64_t>();
        d.interval = j.at("interval").get<double>();
        out.push_back(d);
    }
    return out;
}

json to_json(const FeatureVector& f) {
    return json{{"client", f.client.to_string()},
                {"pkt_rate_up", f.pkt_rate_up},
                {"pkt_rate_down", f.pkt_rate_down},
                {"byte_rate_up", f.byte_rate_up},
                {"byte_rate_down", f.byte_rate_down}};
}

json to_json(const Clustering& c) {
    json clusters = json::array();
    for (std::size_t i = 0; i < c.k; ++i) {
        json members = json::array();
        for (Ipv4 m : c.members(i)) members.push_back(m.to_string());
        clusters.push_back(json{{"centroid", point_json(c.centroids[i])},
                                {"std", point_json(c.stddev[i])},
                                {"size", c.sizes[i]},
                                {"members", std::move(members)}});
    }
    return json{{"k", c.k},
                {"iterations", c.iterations},
                {"wcss", c.wcss_history.empty() ? 0.0 : c.wcss_history.back()},
                {"clusters", std::move(clusters)}};
}

json to_json(const Decomposition& d) {
    json comps = json::array();
    for (const GaussComponent& g : d.components)
        comps.push_back(json{{"mean", g.mean},
                             {"std", g.std},
                             {"weight", g.weight},
                             {"count", g.count},
                             {"degenerate", g.degenerate}});
    return json{{"components", std::move(comps)}, {"boundaries", d.boundaries}};
}

json to_json(const DetectionReport& r) {
    json sources = json::array();
    for (Ipv4 s : r.suspicious_sources) sources.push_back(s.to_string());
    json rationale = json::array();
    for (const ClusterRationale& c : r.rationale)
        rationale.push_back(json{{"cluster", c.cluster},
                                 {"size", c.size},
                                 {"mean_rate", c.intensity},
                                 {"mean_cv", c.sharpness},
                                 {"suspicious", c.suspicious}});
    return json{{"target", r.target.to_string()},
                {"aggregate_byte_rate", r.aggregate_byte_rate},
                {"threshold", r.threshold},
                {"attack", r.attack},
                {"low_confidence", r.low_confidence},
                {"suspicious_clusters", r.suspicious_clusters},
                {"suspicious_sources", std::move(sources)},
                {"rationale", std::move(rationale)}};
}

json to_json(const MitigationPlan& plan) {
    json links = json::array();
    for (const Link& l : plan.links) links.push_back(link_json(l));
    json edits = json::array();
    for (const RuleEdit& e : plan.rule_edits)
        edits.push_back(json{{"op", e.op == EditOp::Delete ? "delete" : "add"},
                             {"rule", to_json(e.rule)}});
    json flows = json::array();
    for (const FlowKey& k : plan.flows)
        flows.push_back(json{{"src", k.src.to_string()}, {"dst", k.dst.to_string()}});
    return json{{"scrubber", plan.scrubber.name()},
                {"attach_to", plan.attach_to.name()},
                {"links", std::move(links)},
                {"flows", std::move(flows)},
                {"rule_edits", std::move(edits)}};
}

json to_json(const FlowTally& t) {
    return json{{"emitted_packets", t.emitted_packets},   {"emitted_bytes", t.emitted_bytes},
                {"delivered_packets", t.delivered_packets}, {"delivered_bytes", t.delivered_bytes},
                {"dropped_packets", t.dropped_packets},   {"dropped_bytes", t.dropped_bytes},
                {"missed_packets", t.missed_packets}};
}

json to_json(const LinkState& s) {
    return json{{"link_index", s.link_index},
                {"arrived_packets", s.arrived_packets},
                {"delivered_packets", s.delivered_packets},
                {"delivered_bytes", s.delivered_bytes},
                {"queued_packets", s.queued_packets},
                {"dropped_packets", s.dropped_packets}};
}

json to_json(const Event& e) {
    return json{{"time", e.time}, {"kind", e.kind}, {"detail", e.detail}};
}

}  // namespace sdnsim
