#pragma once

#include <span>
#include <vector>

#include "anypath/graph.hpp"

namespace anypath {

/// Prioritized next-hop candidates. Members are kept in relay-priority order:
/// ascending remote cost, ties by ascending node id. The first member that
/// receives a broadcast relays it.
struct ForwardingSet {
    std::vector<NodeId> members;

    bool empty() const { return members.empty(); }
    std::size_t size() const { return members.size(); }

    friend bool operator==(const ForwardingSet&, const ForwardingSet&) = default;
};

/// Relay probabilities aligned with a ForwardingSet's member order; sums to 1
/// whenever the hyperlink delivery ratio is positive.
struct WeightVector {
    std::vector<double> weights;
};

enum class MetricId {
    Eatx,  // expected transmission count: hyperlink cost 1/p
    Eatt,  // expected transmission time:  hyperlink cost (1/p) * (s/r) seconds
};

struct MetricKind {
    MetricId id = MetricId::Eatx;
    std::int64_t packet_size_bits = kDefaultPacketBits;  // Eatt only

    static MetricKind eatx() { return {MetricId::Eatx, kDefaultPacketBits}; }
    static MetricKind eatt(std::int64_t bits) {
        if (bits <= 0)
            throw std::invalid_argument("packet size must be positive");
        return {MetricId::Eatt, bits};
    }
};

/// P[at least one member receives a broadcast from i at this rate]. Uses the
/// joint reception model covering (i, rate) when one exists; members outside
/// the model (and all members when there is no model) lose independently.
double hyperlink_delivery_ratio(const Graph& g, NodeId i, std::span<const NodeId> set,
                                std::size_t rate);

/// P[member j relays | someone in the set receives], per member. The set must
/// already be in relay-priority order. Throws when the delivery ratio is 0.
WeightVector relay_weights(const Graph& g, NodeId i, std::span<const NodeId> set,
                           std::size_t rate);

/// Relay-weighted average of member costs; +inf as soon as an infinite-cost
/// member carries positive weight.
Cost remaining_cost(const WeightVector& w, std::span<const Cost> costs);

/// Hyperlink cost from an already-known delivery ratio.
Cost hyperlink_cost_from_ratio(double ratio, const Graph& g, std::size_t rate, MetricKind m);

Cost hyperlink_cost(const Graph& g, NodeId i, std::span<const NodeId> set, std::size_t rate,
                    MetricKind m);

/// Full cost via a forwarding set: hyperlink cost plus remaining cost.
/// remote_costs aligns with the set's member order.
Cost anypath_cost(const Graph& g, NodeId i, std::span<const NodeId> set, std::size_t rate,
                  std::span<const Cost> remote_costs, MetricKind m);

/// Constant-time cost update for growing a forwarding set by one member whose
/// cost is >= every current member's: with t = p_old/p_new,
/// new cost = t * current + (1 - t) * added_cost. Exact for correlated losses
/// too, since the added member has the lowest relay priority.
/// Requires p_new >= p_old > 0.
Cost incremental_update(Cost current, double p_old, double p_new, Cost added_cost);

}  // namespace anypath
