#pragma once

#include <cstdint>
#include <map>
#include <tuple>

#include "sdnsim/routing.hpp"

namespace sdnsim {

struct Counter {
    std::uint64_t packets = 0;
    std::uint64_t bytes = 0;

    Counter& operator+=(const Counter& o) {
        packets += o.packets;
        bytes += o.bytes;
        return *this;
    }
    bool operator==(const Counter&) const = default;
};

/// (switch, src, dst) of a per-flow edge rule.
using FlowSlot = std::tuple<NodeId, Ipv4, Ipv4>;

/// Cumulative per-rule counters. When a per-flow rule is deleted its final
/// counts move to a retired tally for its (switch, src, dst) so polled totals
/// stay monotone across rule rewrites.
class CounterSet {
public:
    void add(std::uint64_t cookie, std::uint64_t packets, std::uint64_t bytes_each);
    Counter get(std::uint64_t cookie) const;
    void retire(const FlowRule& rule);
    Counter retired(const FlowSlot& slot) const;
    const std::map<FlowSlot, Counter>& retired_all() const { return retired_; }

    bool operator==(const CounterSet&) const = default;

private:
    std::map<std::uint64_t, Counter> live_;
    std::map<FlowSlot, Counter> retired_;
};

}  // namespace sdnsim
