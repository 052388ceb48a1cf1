#pragma once

// Shared fixtures and independent brute-force oracles for the test suites.
// Everything here recomputes probabilities by outcome enumeration so the
// closed-form implementation has something independent to disagree with.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "anypath/graph.hpp"
#include "anypath/metrics.hpp"
#include "anypath/rng.hpp"
#include "anypath/solvers.hpp"

namespace testsupport {

using namespace anypath;

// Node 0 reaches node 3 via relays 1 (cost 2.0), 2 (cost 3.3), 4 (cost 10.0)
// over links with ratios 0.3 / 0.2 / 0.7. The 2-relay set costs ~4.69, the
// 3-relay set ~7.19.
inline Graph worked_example() {
    std::vector<LinkSpec> links = {
        {0, 1, 1000000, 0.3},  {0, 2, 1000000, 0.2},
        {0, 4, 1000000, 0.7},  {1, 3, 1000000, 0.5},
        {2, 3, 1000000, 10.0 / 33.0},  {4, 3, 1000000, 0.1},
    };
    return Graph(5, {1000000}, std::move(links));
}

// Per-outcome probability of a receiver subset of `set`, honoring a joint
// model when it covers (i, rate). `subset_mask` indexes into `set`.
inline double outcome_probability(const Graph& g, NodeId i, std::span<const NodeId> set,
                                  std::size_t rate, std::uint32_t subset_mask) {
    const JointReceptionModel* model = g.joint_model(i, rate);
    double independent = 1.0;
    std::uint32_t want_receive = 0, want_lose = 0;
    for (std::size_t q = 0; q < set.size(); ++q) {
        const bool received = (subset_mask >> q) & 1u;
        const int bit = model ? model->neighbor_bit(set[q]) : -1;
        if (bit >= 0) {
            (received ? want_receive : want_lose) |= 1u << bit;
        } else {
            const double p = g.link_ratio(i, set[q], rate);
            independent *= received ? p : 1.0 - p;
        }
    }
    double modeled = 1.0;
    if (model && (want_receive | want_lose)) {
        modeled = 0.0;
        for (std::size_t mask = 0; mask < model->pmf.size(); ++mask)
            if ((mask & want_receive) == want_receive && (mask & want_lose) == 0)
                modeled += model->pmf[mask];
    }
    return modeled * independent;
}

// P[at least one member receives] by full outcome enumeration.
inline double enumerated_delivery_ratio(const Graph& g, NodeId i, std::span<const NodeId> set,
                                        std::size_t rate) {
    double total = 0.0;
    for (std::uint32_t mask = 1; mask < (1u << set.size()); ++mask)
        total += outcome_probability(g, i, set, rate, mask);
    return total;
}

// P[member q relays | someone receives] by full outcome enumeration; the
// relay is the first member (in set order) inside the receiver subset.
inline std::vector<double> enumerated_relay_distribution(const Graph& g, NodeId i,
                                                         std::span<const NodeId> set,
                                                         std::size_t rate) {
    std::vector<double> relays(set.size(), 0.0);
    double someone = 0.0;
    for (std::uint32_t mask = 1; mask < (1u << set.size()); ++mask) {
        const double p = outcome_probability(g, i, set, rate, mask);
        someone += p;
        for (std::size_t q = 0; q < set.size(); ++q) {
            if ((mask >> q) & 1u) {
                relays[q] += p;
                break;
            }
        }
    }
    for (double& w : relays)
        w /= someone;
    return relays;
}

inline Cost enumerated_remaining_cost(const Graph& g, NodeId i, std::span<const NodeId> set,
                                      std::size_t rate, std::span<const Cost> costs) {
    const std::vector<double> relays = enumerated_relay_distribution(g, i, set, rate);
    double total = 0.0;
    for (std::size_t q = 0; q < set.size(); ++q)
        total += relays[q] * costs[q];
    return total;
}

// Random multirate graph in the oracle-friendly regime: n in [3,8], ratios
// bounded away from 0 and 1, per-rate out-degree <= 6.
inline Graph corpus_graph(std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t n = 3 + rng.next_below(6);
    const std::size_t rate_count = 1 + rng.next_below(3);
    std::vector<RateBps> rates;
    for (std::size_t r = 0; r < rate_count; ++r)
        rates.push_back(1000000 * (r + 1));
    const double density = 0.35 + 0.4 * rng.next_double();
    Graph raw = generate_random_graph(n, rates, density,
                                      RatioLaw::parse("decaying:0.05:0.95:0.7"),
                                      splitmix64_next(seed));
    // Trim per-rate out-degree to 6 (drop the largest destination ids).
    std::vector<LinkSpec> kept;
    for (NodeId v = 0; v < raw.node_count(); ++v) {
        for (std::size_t r = 0; r < raw.rate_count(); ++r) {
            auto links = raw.out_links(v, r);
            for (std::size_t k = 0; k < std::min<std::size_t>(links.size(), 6); ++k)
                kept.push_back({v, links[k].node, raw.rate_bps(r), links[k].ratio});
        }
    }
    return Graph(n, rates, std::move(kept));
}

inline std::vector<Cost> member_costs(const RoutingTable& table, const ForwardingSet& set) {
    std::vector<Cost> costs;
    for (NodeId m : set.members)
        costs.push_back(table.cost[m]);
    return costs;
}

// Structural invariants every routing table must satisfy.
inline std::string check_table_invariants(const Graph& g, const RoutingTable& table) {
    const NodeId dest = table.destination;
    if (table.cost[dest] != 0.0)
        return "destination cost is not 0";
    if (!table.fset[dest].empty())
        return "destination has a forwarding set";

    for (NodeId v = 0; v < g.node_count(); ++v) {
        const ForwardingSet& set = table.fset[v];
        if (std::isinf(table.cost[v]) && !set.empty())
            return "unreachable node with a forwarding set";
        if (!std::isinf(table.cost[v]) && v != dest && set.empty())
            return "reachable node without a forwarding set";
        std::set<NodeId> dupes(set.members.begin(), set.members.end());
        if (dupes.size() != set.members.size())
            return "duplicate forwarding-set member";
        for (std::size_t q = 0; q < set.members.size(); ++q) {
            const NodeId m = set.members[q];
            if (table.cost[m] > table.cost[v])
                return "member costs more than the node";
            if (table.cost[m] == table.cost[v])
                return "redundant equal-cost member";
            if (q > 0) {
                const NodeId prev = set.members[q - 1];
                if (table.cost[prev] > table.cost[m])
                    return "members out of cost order";
                if (table.cost[prev] == table.cost[m] && prev > m)
                    return "members out of id order on a cost tie";
            }
        }
    }

    // Forwarding DAG must be acyclic: Kahn's algorithm.
    std::vector<std::size_t> out_degree(g.node_count(), 0);
    std::vector<std::vector<NodeId>> rev(g.node_count());
    for (NodeId v = 0; v < g.node_count(); ++v) {
        out_degree[v] = table.fset[v].members.size();
        for (NodeId m : table.fset[v].members)
            rev[m].push_back(v);
    }
    std::vector<NodeId> frontier;
    for (NodeId v = 0; v < g.node_count(); ++v)
        if (out_degree[v] == 0)
            frontier.push_back(v);
    std::size_t removed = 0;
    while (!frontier.empty()) {
        const NodeId v = frontier.back();
        frontier.pop_back();
        ++removed;
        for (NodeId u : rev[v])
            if (--out_degree[u] == 0)
                frontier.push_back(u);
    }
    if (removed != g.node_count())
        return "forwarding graph has a cycle";
    return {};
}

// A produced set must be a prefix of the node's finite-cost neighbors at
// that rate, sorted by (cost, id).
inline bool is_cost_prefix(const Graph& g, const RoutingTable& table, NodeId v, std::size_t rate,
                           const ForwardingSet& set) {
    std::vector<NodeId> sorted;
    for (const LinkRef& e : g.out_links(v, rate))
        if (!std::isinf(table.cost[e.node]))
            sorted.push_back(e.node);
    std::sort(sorted.begin(), sorted.end(), [&](NodeId a, NodeId b) {
        if (table.cost[a] != table.cost[b])
            return table.cost[a] < table.cost[b];
        return a < b;
    });
    if (set.members.size() > sorted.size())
        return false;
    return std::equal(set.members.begin(), set.members.end(), sorted.begin());
}

inline std::string check_prefix_property(const Graph& g, const RoutingTable& table) {
    for (NodeId v = 0; v < g.node_count(); ++v) {
        if (v == table.destination)
            continue;
        if (!table.fset[v].empty()) {
            const std::size_t rate = table.fixed_rate ? *table.fixed_rate : *table.tx_rate[v];
            if (!is_cost_prefix(g, table, v, rate, table.fset[v]))
                return "global set of node " + std::to_string(v) + " is not a cost prefix";
        }
        for (std::size_t r = 0; r < table.rate_fset.size(); ++r) {
            if (table.rate_fset[r][v].empty())
                continue;
            if (!is_cost_prefix(g, table, v, r, table.rate_fset[r][v]))
                return "rate-" + std::to_string(r) + " set of node " + std::to_string(v) +
                       " is not a cost prefix";
        }
    }
    return {};
}

}  // namespace testsupport
