#include "sdnsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sdnsim/error.hpp"
#include "sdnsim/report.hpp"

namespace sdnsim {

using nlohmann::json;

double ScenarioConfig::max_legit_rate() const {
    return legit_rate(client_matrix - 1, client_matrix - 1, client_matrix, base_rate);
}

double ScenarioConfig::legit_aggregate_byte_rate() const {
    double total = 0.0;
    for (int i = 0; i < client_matrix; ++i)
        for (int j = 0; j < client_matrix; ++j) total += legit_rate(i, j, client_matrix, base_rate);
    return total * request_size;
}

double ScenarioConfig::effective_attack_rate() const {
    return attack_rate.value_or(10.0 * max_legit_rate());
}

double ScenarioConfig::effective_threshold() const {
    return threshold.value_or(10.0 * legit_aggregate_byte_rate());
}

SimConfig ScenarioConfig::sim_config() const {
    return SimConfig{tick, duration, seed, attack_start, poll_interval};
}

const std::vector<std::string>& config_fields() {
    static const std::vector<std::string> fields = {
        "grid_n",       "grid_m",      "grid_k",        "server_edge",  "server_slot",
        "client_matrix", "base_rate",  "request_size",  "response_size", "attackers",
        "attack_rate",  "attack_start", "duration",     "tick",         "poll_interval",
        "seed",         "threshold",   "k_clusters",    "bandwidth",    "match_radius",
        "normalize",    "mitigation",  "output_dir"};
    return fields;
}

namespace {

class FieldReader {
public:
    FieldReader(const json& doc, std::vector<std::string>& errors) : doc_(doc), errors_(errors) {}

    template <typename Int>
    void integer(const char* key, Int& out) {
        const json* v = find(key);
        if (!v) return;
        if (!v->is_number_integer()) return fail(key, "an integer");
        if (v->is_number_unsigned()) {
            out = static_cast<Int>(v->get<std::uint64_t>());
        } else {
            const auto x = v->get<std::int64_t>();
            if constexpr (std::is_unsigned_v<Int>) {
                if (x < 0) return fail(key, "a non-negative integer");
            }
            out = static_cast<Int>(x);
        }
    }

    void number(const char* key, double& out) {
        const json* v = find(key);
        if (!v) return;
        if (!v->is_number()) return fail(key, "a number");
        out = v->get<double>();
    }

    void number(const char* key, std::optional<double>& out) {
        const json* v = find(key);
        if (!v) return;
        if (!v->is_number()) return fail(key, "a number");
        out = v->get<double>();
    }

    void boolean(const char* key, bool& out) {
        const json* v = find(key);
        if (!v) return;
        if (!v->is_boolean()) return fail(key, "a boolean");
        out = v->get<bool>();
    }

    void string(const char* key, std::string& out) {
        const json* v = find(key);
        if (!v) return;
        if (!v->is_string()) return fail(key, "a string");
        out = v->get<std::string>();
    }

    void addresses(const char* key, std::vector<Ipv4>& out) {
        const json* v = find(key);
        if (!v) return;
        if (!v->is_array()) return fail(key, "an array of addresses");
        out.clear();
        for (const json& item : *v) {
            std::optional<Ipv4> ip;
            if (item.is_string()) ip = Ipv4::parse(item.get<std::string>());
            if (!ip) return fail(key, "an array of dotted-quad addresses");
            out.push_back(*ip);
        }
    }

private:
    const json* find(const char* key) const {
        auto it = doc_.find(key);
        if (it == doc_.end() || it->is_null()) return nullptr;
        return &*it;
    }
    void fail(const char* key, const char* what) {
        errors_.push_back(std::string(key) + ": must be " + what);
    }

    const json& doc_;
    std::vector<std::string>& errors_;
};

bool is_multiple(double value, double step) {
    const double ratio = value / step;
    return std::abs(ratio - std::round(ratio)) <= 1e-9 * std::max(1.0, ratio);
}

void check_semantics(const ScenarioConfig& c, std::vector<std::string>& errors) {
    const auto err = [&errors](std::string msg) { errors.push_back(std::move(msg)); };

    bool grid_ok = true;
    if (c.grid_n < 2 || c.grid_m < 2) {
        err("grid: n and m must both be at least 2");
        grid_ok = false;
    } else if (2 * c.grid_n + 2 * c.grid_m - 4 > 256) {
        err("grid: perimeter exceeds 256 edge switches");
        grid_ok = false;
    }
    if (c.grid_k < 1 || c.grid_k > kMaxHostsPerEdge) {
        err("grid_k: must be in [1, " + std::to_string(kMaxHostsPerEdge) + "]");
        grid_ok = false;
    }

    const int edges = 2 * c.grid_n + 2 * c.grid_m - 4;
    bool server_ok = grid_ok;
    if (grid_ok && (c.server_edge < 0 || c.server_edge >= edges)) {
        err("server_edge: must be in [0, " + std::to_string(edges) + ")");
        server_ok = false;
    }
    if (grid_ok && (c.server_slot < 0 || c.server_slot >= c.grid_k)) {
        err("server_slot: must be in [0, " + std::to_string(c.grid_k) + ")");
        server_ok = false;
    }

    if (c.client_matrix < 1) err("client_matrix: must be at least 1");
    if (!(c.base_rate > 0.0)) err("base_rate: must be positive");
    if (c.request_size == 0) err("request_size: must be positive");
    if (c.response_size == 0) err("response_size: must be positive");
    if (c.attack_rate && !(*c.attack_rate > 0.0)) err("attack_rate: must be positive");
    if (c.attack_start < 0.0) err("attack_start: must be non-negative");

    bool attackers_ok = true;
    std::set<Ipv4> seen;
    const Ipv4 server = host_address(c.server_edge, c.server_slot);
    for (Ipv4 a : c.attackers) {
        if (!seen.insert(a).second) {
            err("attackers: duplicate " + a.to_string());
            attackers_ok = false;
            continue;
        }
        if (grid_ok) {
            const bool is_host = a.octet(0) == 10 && a.octet(1) == 0 && a.octet(2) < edges &&
                                 a.octet(3) < c.grid_k;
            if (!is_host) {
                err("attackers: " + a.to_string() + " is not a host");
                attackers_ok = false;
            } else if (server_ok && a == server) {
                err("attackers: " + a.to_string() + " is the server");
                attackers_ok = false;
            }
        }
    }
    if (grid_ok && attackers_ok && c.client_matrix >= 1) {
        const long hosts = static_cast<long>(edges) * c.grid_k;
        const long needed = static_cast<long>(c.client_matrix) * c.client_matrix;
        const long available = hosts - 1 - static_cast<long>(c.attackers.size());
        if (needed > available)
            err("client_matrix: " + std::to_string(needed) + " clients need more than the " +
                std::to_string(available) + " free hosts");
    }

    bool tick_ok = true;
    if (!(c.tick > 0.0)) {
        err("tick: must be positive");
        tick_ok = false;
    }
    if (c.duration < 0.0)
        err("duration: must be non-negative");
    else if (tick_ok && !is_multiple(c.duration, c.tick))
        err("duration: must be a multiple of tick");
    if (!(c.poll_interval > 0.0))
        err("poll_interval: must be positive");
    else if (tick_ok && !is_multiple(c.poll_interval, c.tick))
        err("poll_interval: must be a multiple of tick");

    if (c.threshold && !(*c.threshold > 0.0)) err("threshold: must be positive");
    if (c.k_clusters < 1) err("k_clusters: must be at least 1");
    if (c.bandwidth && !(*c.bandwidth > 0.0)) err("bandwidth: must be positive");
    if (c.match_radius < 0.0) err("match_radius: must be non-negative");
    if (c.output_dir.empty()) err("output_dir: must not be empty");
}

}  // namespace

ValidationResult validate_config(std::string_view raw) {
    ValidationResult result;
    ScenarioConfig config;

    const bool blank = std::all_of(raw.begin(), raw.end(),
                                   [](char ch) { return std::isspace(static_cast<unsigned char>(ch)); });
    if (!blank) {
        const json doc = json::parse(raw.begin(), raw.end(), nullptr, false);
        if (doc.is_discarded()) {
            result.errors.push_back("document: not valid JSON");
            return result;
        }
        if (!doc.is_object()) {
            result.errors.push_back("document: must be an object of scenario fields");
            return result;
        }
        const auto& known = config_fields();
        for (const auto& [key, _] : doc.items())
            if (std::find(known.begin(), known.end(), key) == known.end())
                result.errors.push_back(key + ": unknown field");

        FieldReader r(doc, result.errors);
        r.integer("grid_n", config.grid_n);
        r.integer("grid_m", config.grid_m);
        r.integer("grid_k", config.grid_k);
        r.integer("server_edge", config.server_edge);
        r.integer("server_slot", config.server_slot);
        r.integer("client_matrix", config.client_matrix);
        r.number("base_rate", config.base_rate);
        r.integer("request_size", config.request_size);
        r.integer("response_size", config.response_size);
        r.addresses("attackers", config.attackers);
        r.number("attack_rate", config.attack_rate);
        r.number("attack_start", config.attack_start);
        r.number("duration", config.duration);
        r.number("tick", config.tick);
        r.number("poll_interval", config.poll_interval);
        r.integer("seed", config.seed);
        r.number("threshold", config.threshold);
        r.integer("k_clusters", config.k_clusters);
        r.number("bandwidth", config.bandwidth);
        r.number("match_radius", config.match_radius);
        r.boolean("normalize", config.normalize);
        r.boolean("mitigation", config.mitigation);
        r.string("output_dir", config.output_dir);
    }

    check_semantics(config, result.errors);
    if (result.errors.empty()) result.config = std::move(config);
    return result;
}

std::string config_to_text(const ScenarioConfig& c) {
    json attackers = json::array();
    for (Ipv4 a : c.attackers) attackers.push_back(a.to_string());
    json doc{{"grid_n", c.grid_n},
             {"grid_m", c.grid_m},
             {"grid_k", c.grid_k},
             {"server_edge", c.server_edge},
             {"server_slot", c.server_slot},
             {"client_matrix", c.client_matrix},
             {"base_rate", c.base_rate},
             {"request_size", c.request_size},
             {"response_size", c.response_size},
             {"attackers", std::move(attackers)},
             {"attack_start", c.attack_start},
             {"duration", c.duration},
             {"tick", c.tick},
             {"poll_interval", c.poll_interval},
             {"seed", c.seed},
             {"k_clusters", c.k_clusters},
             {"match_radius", c.match_radius},
             {"normalize", c.normalize},
             {"mitigation", c.mitigation},
             {"output_dir", c.output_dir}};
    if (c.attack_rate) doc["attack_rate"] = *c.attack_rate;
    if (c.threshold) doc["threshold"] = *c.threshold;
    if (c.bandwidth) doc["bandwidth"] = *c.bandwidth;
    return doc.dump(2) + "\n";
}

std::optional<ScenarioConfig> config_template(std::string_view name) {
    ScenarioConfig c;
    if (name == "reference") return c;
    if (name == "attack") {
        // One attacker in slot 2 of every edge switch.
        const int edges = 2 * c.grid_n + 2 * c.grid_m - 4;
        for (int u = 0; u < edges; ++u) c.attackers.push_back(host_address(u, 2));
        c.attack_rate = 10.0 * c.max_legit_rate();
        return c;
    }
    return std::nullopt;
}

ScenarioSetup build_scenario(const ScenarioConfig& config) {
    ScenarioSetup s{Topology::build_grid(config.grid_n, config.grid_m, config.grid_k), {}, {}, {}, {}};
    s.server = NodeId::host(config.server_edge, config.server_slot);
    s.topology.set_role(s.server, HostRole::Server);
    s.profiles[s.server] =
        TrafficProfile{ProfileKind::Server, 0.0, config.request_size, config.response_size};

    const double attack_rate = config.effective_attack_rate();
    for (Ipv4 a : config.attackers) {
        const auto host = s.topology.host_at(a);
        if (!host || *host == s.server) throw UsageError("invalid attacker " + a.to_string());
        s.topology.set_role(*host, HostRole::Attacker);
        s.attackers.push_back(*host);
        s.profiles[*host] =
            TrafficProfile{ProfileKind::Attacker, attack_rate, config.request_size, config.response_size};
    }
    std::sort(s.attackers.begin(), s.attackers.end());

    const int k = config.client_matrix;
    int placed = 0;
    for (const NodeId& host : s.topology.hosts_with_role(HostRole::Unassigned)) {
        if (placed == k * k) break;
        s.topology.set_role(host, HostRole::LegitClient);
        s.clients.push_back(host);
        s.profiles[host] = TrafficProfile{ProfileKind::LegitClient,
                                          legit_rate(placed / k, placed % k, k, config.base_rate),
                                          config.request_size, config.response_size};
        ++placed;
    }
    if (placed != k * k) throw UsageError("not enough hosts for the client matrix");
    return s;
}

namespace {

PollAnalysis analyze(const ScenarioConfig& config, Ipv4 server, const PollRecord& poll,
                     const std::optional<Clustering>& previous) {
    PollAnalysis a;
    a.time = poll.time;
    const auto aggregate = aggregate_by_destination(poll.deltas);
    if (auto it = aggregate.find(server); it != aggregate.end())
        a.aggregate_byte_rate = static_cast<double>(it->second.bytes) / config.poll_interval;

    a.features = build_features(poll.deltas, server, config.poll_interval);
    if (!a.features.empty()) {
        const auto& input = config.normalize ? max_scaled(a.features) : a.features;
        KMeansOptions opts;
        opts.k = std::min<std::size_t>(static_cast<std::size_t>(config.k_clusters), input.size());
        opts.seed = config.seed;
        a.clustering = kmeans(input, opts);
        if (previous) a.new_clusters = compare_clusterings(*previous, *a.clustering, config.match_radius);
    }
    a.detection = detect(server, a.aggregate_byte_rate, config.effective_threshold(),
                         a.clustering.value_or(Clustering{}));

    std::vector<double> rates;
    for (const FeatureVector& f : a.features) rates.push_back(f.byte_rate_up);
    if (rates.size() >= 2) {
        a.bandwidth = config.bandwidth.value_or(silverman_bandwidth(rates));
        DecomposeOptions opts;
        opts.bandwidth = a.bandwidth;
        a.decomposition = decompose_gaussian_1d(rates, opts);
    }
    return a;
}

json poll_json(const PollRecord& poll, const PollAnalysis& a) {
    json deltas = json::array();
    for (const DeltaRecord& d : poll.deltas) deltas.push_back(to_json(d));
    json features = json::array();
    for (const FeatureVector& f : a.features) features.push_back(to_json(f));
    return json{{"time", a.time},
                {"aggregate_byte_rate", a.aggregate_byte_rate},
                {"deltas", std::move(deltas)},
                {"features", std::move(features)},
                {"clustering", a.clustering ? to_json(*a.clustering) : json(nullptr)},
                {"detection", to_json(a.detection)},
                {"decomposition", a.decomposition ? to_json(*a.decomposition) : json(nullptr)},
                {"bandwidth", a.bandwidth},
                {"new_clusters", a.new_clusters}};
}

}  // namespace

ScenarioOutcome execute_scenario(const ScenarioConfig& config, const TickObserver& observer) {
    ScenarioOutcome out;
    out.config = config;
    out.setup = build_scenario(config);

    Simulation sim(out.setup.topology, RuleTable{}, out.setup.profiles, config.sim_config());
    const Ipv4 server = sim.server_address();

    std::optional<Clustering> previous;
    auto on_poll = [&](Simulation& s, const PollRecord& poll) {
        PollAnalysis a = analyze(config, server, poll, previous);
        if (a.clustering) previous = a.clustering;
        if (a.detection.attack) {
            s.log("attack", "aggregate=" + format_seconds(a.aggregate_byte_rate) +
                                " suspicious=" + std::to_string(a.detection.suspicious_sources.size()));
            if (config.mitigation && !out.mitigation && !a.detection.suspicious_sources.empty()) {
                MitigationPlan plan = plan_scrubber(a.detection, s.topology(), s.rules());
                AppliedMitigation applied = apply(plan, s.topology(), s.rules());
                std::vector<std::string> rules_after = applied.rules.dump();
                s.reconfigure(std::move(applied.topology), std::move(applied.rules), applied.removed);
                s.log("mitigation", plan.scrubber.name() + " at " + plan.attach_to.name() +
                                        " flows=" + std::to_string(plan.flows.size()));
                out.mitigation = MitigationRecord{poll.time, std::move(plan), std::move(rules_after)};
            }
        }
        out.analyses.push_back(std::move(a));
    };
    TickHook on_tick;
    if (observer) on_tick = [&observer](const Simulation& s) { observer(s); };

    out.record = run(sim, on_poll, on_tick);
    out.final_topology = sim.topology();
    out.final_rules = sim.rules().dump();
    out.links = sim.link_states();
    return out;
}

std::string ScenarioOutcome::stats_csv() const {
    std::ostringstream os;
    write_stats_csv(os, record.stat_log());
    return os.str();
}

std::string ScenarioOutcome::report_text() const {
    json polls = json::array();
    std::optional<double> first_attack;
    for (std::size_t i = 0; i < analyses.size(); ++i) {
        polls.push_back(poll_json(record.polls[i], analyses[i]));
        if (analyses[i].detection.attack && !first_attack) first_attack = analyses[i].time;
    }
    json tallies = json::array();
    for (const auto& [key, t] : record.tallies) {
        json j = to_json(t);
        j["src"] = key.src.to_string();
        j["dst"] = key.dst.to_string();
        tallies.push_back(std::move(j));
    }
    json links = json::array();
    for (const LinkState& s : this->links) links.push_back(to_json(s));
    json events = json::array();
    for (const Event& e : record.events) events.push_back(to_json(e));

    json mitigation_json = nullptr;
    if (mitigation)
        mitigation_json = json{{"time", mitigation->time},
                               {"plan", to_json(mitigation->plan)},
                               {"rules_after", mitigation->rules_after}};

    json report{
        {"config", json::parse(config_to_text(config))},
        {"derived",
         {{"attack_rate", config.effective_attack_rate()},
          {"threshold", config.effective_threshold()},
          {"legit_aggregate_byte_rate", config.legit_aggregate_byte_rate()}}},
        {"topology", to_json(setup.topology)},
        {"final_topology", to_json(final_topology)},
        {"polls", std::move(polls)},
        {"mitigation", std::move(mitigation_json)},
        {"rules", final_rules},
        {"tallies", std::move(tallies)},
        {"links", std::move(links)},
        {"events", std::move(events)},
        {"summary",
         {{"polls", analyses.size()},
          {"first_attack_time", first_attack ? json(*first_attack) : json(nullptr)},
          {"mitigated", mitigation.has_value()}}},
    };
    return report.dump(2) + "\n";
}

void write_artifacts(const ScenarioOutcome& outcome, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

    const auto write = [&dir](const char* name, const std::string& body) {
        const auto path = dir / name;
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot open " + path.string());
        f << body;
        f.flush();
        if (!f) throw IoError("cannot write " + path.string());
    };
    write("stats.csv", outcome.stats_csv());
    write("report.json", outcome.report_text());
}

}  // namespace sdnsim
