#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "anypath/graph.hpp"
#include "anypath/metrics.hpp"

namespace anypath {

/// Full routing state toward one destination.
struct RoutingTable {
    NodeId destination = 0;
    MetricKind metric;
    std::optional<std::size_t> fixed_rate;  // set for single-rate tables

    std::vector<Cost> cost;                             // D_i
    std::vector<ForwardingSet> fset;                    // F_i, canonical order
    std::vector<std::optional<std::size_t>> tx_rate;    // T_i; none for dest/unreachable

    // Per-rate estimates, multirate solvers only: [rate][node].
    std::vector<std::vector<Cost>> rate_cost;
    std::vector<std::vector<ForwardingSet>> rate_fset;

    std::vector<NodeId> settle_order;  // Dijkstra-style solvers
    int rounds = 0;                    // Bellman-Ford solvers: rounds that changed anything

    bool multirate() const { return !fixed_rate.has_value(); }
};

/// Fired on every forwarding-set admission. `before` is the cost via the
/// previous prefix (+inf for the first member); `after` the cost including
/// `member`. Prefix costs are non-increasing along one construction chain.
struct AdmissionEvent {
    NodeId node = 0;
    std::size_t rate = 0;
    NodeId member = 0;
    Cost before = kUnreachable;
    Cost after = kUnreachable;
};
using AdmissionObserver = std::function<void(const AdmissionEvent&)>;

/// Dijkstra-style solver at one fixed rate.
RoutingTable shortest_anypath_first(const Graph& g, NodeId destination, std::size_t rate,
                                    MetricKind metric,
                                    const AdmissionObserver* observer = nullptr);

/// Synchronous distance-vector solver at one fixed rate: every round rebuilds
/// each node's candidate prefix against the previous round's costs. Stops
/// after |V|-1 rounds or one full round without changes.
RoutingTable anypath_bellman_ford(const Graph& g, NodeId destination, std::size_t rate,
                                  MetricKind metric,
                                  const AdmissionObserver* observer = nullptr);

/// Dijkstra-style solver that jointly picks the forwarding set and the
/// transmission rate per node.
RoutingTable shortest_multirate_anypath_first(const Graph& g, NodeId destination,
                                              MetricKind metric,
                                              const AdmissionObserver* observer = nullptr);

/// Distance-vector counterpart of the multirate solver.
RoutingTable multirate_anypath_bellman_ford(const Graph& g, NodeId destination,
                                            MetricKind metric,
                                            const AdmissionObserver* observer = nullptr);

/// CSV rows `node,cost,rate,forwarding_set`; costs in milliseconds for the
/// time metric, dimensionless for the transmission-count metric, `inf` when
/// unreachable. Forwarding sets are semicolon-joined in priority order.
void write_table_csv(std::ostream& out, const Graph& g, const RoutingTable& table);

/// Cost column value as written to CSV (ms for Eatt, raw for Eatx).
std::string format_cost(Cost cost, MetricKind metric);

struct TableMismatch {
    NodeId node = 0;
    std::string field;
    std::string lhs;
    std::string rhs;
};

/// First difference between two tables beyond `tolerance` on costs, or
/// any difference in forwarding sets / selected rates. nullopt when equal.
std::optional<TableMismatch> compare_tables(const RoutingTable& a, const RoutingTable& b,
                                            double tolerance);

}  // namespace anypath
