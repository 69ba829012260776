#include "sdnsim/telemetry.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>

#include "sdnsim/error.hpp"

namespace sdnsim {

std::vector<StatSample> poll(const RuleTable& rules, const CounterSet& counters, double t) {
    std::map<FlowSlot, Counter> totals;
    for (const auto& [sw, list] : rules.tables()) {
        if (sw.kind != NodeKind::EdgeSwitch) continue;
        for (const FlowRule& r : list) {
            if (!r.match_src) continue;
            totals[FlowSlot{sw, *r.match_src, r.match_dst}] += counters.get(r.cookie);
        }
    }
    // Slots whose rules were all rewritten still report their retired counts.
    for (const auto& [slot, c] : counters.retired_all())
        if (std::get<0>(slot).kind == NodeKind::EdgeSwitch) totals[slot] += c;

    std::vector<StatSample> samples;
    samples.reserve(totals.size());
    for (const auto& [slot, c] : totals) {
        const auto& [sw, src, dst] = slot;
        samples.push_back(StatSample{t, sw, src, dst, c.packets, c.bytes});
    }
    return samples;
}

StatStore::StatStore(std::map<Ipv4, NodeId> ingress_edge) : ingress_(std::move(ingress_edge)) {}

std::vector<DeltaRecord> StatStore::ingest(const std::vector<StatSample>& samples, double t) {
    if (t < last_poll_) throw InvariantViolation("poll time went backwards");
    for (const StatSample& s : samples)
        if (s.timestamp != t) throw InvariantViolation("samples from mixed poll instants");

    const double interval = t - last_poll_;
    std::vector<DeltaRecord> out;
    std::map<FlowSlot, Totals> next = last_;
    for (const StatSample& s : samples) {
        const FlowSlot slot{s.sw, s.src, s.dst};
        const Totals prev = last_.count(slot) ? last_.at(slot) : Totals{};
        if (s.packets_total < prev.packets || s.bytes_total < prev.bytes)
            throw InvariantViolation("counter decreased for " + s.sw.name() + " " +
                                     s.src.to_string() + "->" + s.dst.to_string());
        next[slot] = Totals{s.packets_total, s.bytes_total};

        auto ingress = ingress_.find(s.src);
        if (ingress == ingress_.end() || ingress->second != s.sw) continue;
        out.push_back(DeltaRecord{t, s.src, s.dst, s.packets_total - prev.packets,
                                  s.bytes_total - prev.bytes, interval});
    }
    last_ = std::move(next);
    log_.insert(log_.end(), samples.begin(), samples.end());
    last_poll_ = t;
    return out;
}

std::optional<Totals> StatStore::last_seen(const NodeId& sw, Ipv4 src, Ipv4 dst) const {
    auto it = last_.find(FlowSlot{sw, src, dst});
    if (it == last_.end()) return std::nullopt;
    return it->second;
}

std::vector<DeltaRecord> delta(StatStore& store, const std::vector<StatSample>& samples,
                               double t) {
    return store.ingest(samples, t);
}

std::vector<std::vector<DeltaRecord>> replay(const std::vector<StatSample>& log,
                                             const std::map<Ipv4, NodeId>& ingress_edge) {
    StatStore store(ingress_edge);
    std::vector<std::vector<DeltaRecord>> out;
    std::size_t i = 0;
    while (i < log.size()) {
        std::size_t j = i;
        while (j < log.size() && log[j].timestamp == log[i].timestamp) ++j;
        std::vector<StatSample> batch(log.begin() + static_cast<std::ptrdiff_t>(i),
                                      log.begin() + static_cast<std::ptrdiff_t>(j));
        out.push_back(store.ingest(batch, log[i].timestamp));
        i = j;
    }
    return out;
}

std::map<Ipv4, Totals> aggregate_by_destination(const std::vector<DeltaRecord>& deltas) {
    // map: one (key, value) pair per record
    std::vector<std::pair<Ipv4, Totals>> mapped;
    mapped.reserve(deltas.size());
    for (const DeltaRecord& d : deltas) mapped.emplace_back(d.dst, Totals{d.d_packets, d.d_bytes});

    // reduce: fold values per key
    std::map<Ipv4, Totals> reduced;
    for (const auto& [key, value] : mapped) {
        Totals& acc = reduced[key];
        acc.packets += value.packets;
        acc.bytes += value.bytes;
    }
    return reduced;
}

std::string format_seconds(double t) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, t);
    if (ec != std::errc{}) throw InvariantViolation("cannot format timestamp");
    return std::string(buf, end);
}

void write_stats_csv(std::ostream& out, const std::vector<StatSample>& samples) {
    out << kStatsCsvHeader << '\n';
    for (const StatSample& s : samples) {
        out << format_seconds(s.timestamp) << ',' << s.sw.name() << ',' << s.src.to_string() << ','
            << s.dst.to_string() << ',' << s.packets_total << ',' << s.bytes_total << '\n';
    }
}

namespace {

template <typename T>
bool parse_number(std::string_view text, T& out) {
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc{} && p == text.data() + text.size();
}

}  // namespace

std::vector<StatSample> read_stats_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kStatsCsvHeader)
        throw UsageError("stats CSV header mismatch");

    std::vector<StatSample> samples;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::vector<std::string_view> fields;
        std::string_view rest = line;
        while (true) {
            auto comma = rest.find(',');
            fields.push_back(rest.substr(0, comma));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        const auto bad = [row] { return UsageError("malformed stats row " + std::to_string(row)); };
        if (fields.size() != 6) throw bad();

        StatSample s;
        auto sw = NodeId::parse(fields[1]);
        auto src = Ipv4::parse(fields[2]);
        auto dst = Ipv4::parse(fields[3]);
        if (!parse_number(fields[0], s.timestamp) || !sw || !src || !dst ||
            !parse_number(fields[4], s.packets_total) || !parse_number(fields[5], s.bytes_total))
            throw bad();
        s.sw = *sw;
        s.src = *src;
        s.dst = *dst;
        samples.push_back(s);
    }
    return samples;
}

}  // namespace sdnsim
