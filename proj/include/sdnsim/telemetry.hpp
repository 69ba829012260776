#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <vector>

#include "sdnsim/counters.hpp"
#include "sdnsim/routing.hpp"

namespace sdnsim {

/// Cumulative counters of one per-flow edge rule at a poll instant.
struct StatSample {
    double timestamp = 0.0;
    NodeId sw;
    Ipv4 src;
    Ipv4 dst;
    std::uint64_t packets_total = 0;
    std::uint64_t bytes_total = 0;

    bool operator==(const StatSample&) const = default;
};

/// Traffic of one flow between two consecutive polls.
struct DeltaRecord {
    double interval_end = 0.0;
    Ipv4 src;
    Ipv4 dst;
    std::uint64_t d_packets = 0;
    std::uint64_t d_bytes = 0;
    double interval = 0.0;

    bool operator==(const DeltaRecord&) const = default;
};

struct Totals {
    std::uint64_t packets = 0;
    std::uint64_t bytes = 0;
    bool operator==(const Totals&) const = default;
};

/// Polls every edge switch: one sample per distinct (switch, src, dst) among
/// rules that match on both addresses. Core and scrubber switches are skipped.
std::vector<StatSample> poll(const RuleTable& rules, const CounterSet& counters, double t);

/// Append-only sample log plus last-seen totals per (switch, src, dst).
///
/// Each flow is counted at its ingress edge switch only (where `src` attaches),
/// so a flow seen by two edge switches yields a single DeltaRecord. Samples
/// from other switches are still logged and checked for monotonicity.
class StatStore {
public:
    explicit StatStore(std::map<Ipv4, NodeId> ingress_edge);

    /// Appends one poll's samples and returns the per-flow deltas since the
    /// previous poll. A flow seen for the first time has a zero baseline.
    /// Throws InvariantViolation if a total decreases or timestamps are mixed.
    std::vector<DeltaRecord> ingest(const std::vector<StatSample>& samples, double t);

    const std::vector<StatSample>& log() const { return log_; }
    std::optional<Totals> last_seen(const NodeId& sw, Ipv4 src, Ipv4 dst) const;

private:
    std::map<Ipv4, NodeId> ingress_;
    std::vector<StatSample> log_;
    std::map<FlowSlot, Totals> last_;
    double last_poll_ = 0.0;
};

/// Free-function form of StatStore::ingest.
std::vector<DeltaRecord> delta(StatStore& store, const std::vector<StatSample>& samples, double t);

/// Rebuilds every DeltaRecord from a persisted sample log, grouped by poll
/// instant in order of appearance.
std::vector<std::vector<DeltaRecord>> replay(const std::vector<StatSample>& log,
                                             const std::map<Ipv4, NodeId>& ingress_edge);

/// Exact per-destination sums, map phase then reduce phase.
std::map<Ipv4, Totals> aggregate_by_destination(const std::vector<DeltaRecord>& deltas);

inline constexpr const char* kStatsCsvHeader =
    "timestamp,switch,src_ip,dst_ip,packets_total,bytes_total";

void write_stats_csv(std::ostream& out, const std::vector<StatSample>& samples);
/// Throws UsageError on a malformed header or row.
std::vector<StatSample> read_stats_csv(std::istream& in);

/// Shortest decimal text that round-trips the double.
std::string format_seconds(double t);

}  // namespace sdnsim
