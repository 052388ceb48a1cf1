#include "anypath/solvers.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <ostream>
#include <queue>

namespace anypath {

namespace {

using HeapEntry = std::pair<Cost, NodeId>;
using MinHeap = std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<HeapEntry>>;

void fire(const AdmissionObserver* observer, NodeId node, std::size_t rate, NodeId member,
          Cost before, Cost after) {
    if (observer && *observer)
        (*observer)({node, rate, member, before, after});
}

// Incremental forwarding-set state for one (node, rate).
struct PrefixState {
    std::vector<NodeId> members;
    double ratio = 0.0;  // hyperlink delivery ratio of `members`
    Cost cost = kUnreachable;

    // Grows the set by one member of cost `added_cost`, reachable over a link
    // of ratio `link`. Constant time unless a joint model governs the node.
    void admit(const Graph& g, NodeId node, std::size_t rate, NodeId member, double link,
               Cost added_cost, MetricKind metric, const AdmissionObserver* observer) {
        double next_ratio;
        if (g.joint_model(node, rate) != nullptr) {
            members.push_back(member);
            next_ratio = hyperlink_delivery_ratio(g, node, members, rate);
            members.pop_back();
        } else {
            next_ratio = 1.0 - (1.0 - ratio) * (1.0 - link);
        }
        const Cost before = members.empty() ? kUnreachable : cost;
        const Cost after = members.empty()
                               ? hyperlink_cost_from_ratio(next_ratio, g, rate, metric) + added_cost
                               : incremental_update(cost, ratio, next_ratio, added_cost);
        fire(observer, node, rate, member, before, after);
        members.push_back(member);
        ratio = next_ratio;
        cost = after;
    }
};

void check_destination(const Graph& g, NodeId destination) {
    if (destination >= g.node_count())
        throw std::invalid_argument("destination id " + std::to_string(destination) +
                                    " out of range (graph has " +
                                    std::to_string(g.node_count()) + " nodes)");
}

// Members sorted into relay-priority order: ascending (cost, id).
ForwardingSet canonical_set(std::vector<NodeId> members, const std::vector<Cost>& costs) {
    std::sort(members.begin(), members.end(), [&](NodeId a, NodeId b) {
        if (costs[a] != costs[b])
            return costs[a] < costs[b];
        return a < b;
    });
    return ForwardingSet{std::move(members)};
}

RoutingTable run_dijkstra(const Graph& g, NodeId destination,
                          const std::vector<std::size_t>& rates, bool multirate,
                          MetricKind metric, const AdmissionObserver* observer) {
    check_destination(g, destination);
    const std::size_t n = g.node_count();

    std::vector<Cost> dist(n, kUnreachable);
    std::vector<std::optional<std::size_t>> tx_rate(n);
    std::vector<std::vector<PrefixState>> state(rates.size(), std::vector<PrefixState>(n));
    dist[destination] = 0.0;

    MinHeap heap;
    std::vector<bool> settled(n, false);
    std::vector<NodeId> settle_order;
    settle_order.reserve(n);
    for (NodeId v = 0; v < n; ++v)
        heap.push({dist[v], v});

    while (!heap.empty()) {
        const auto [key, j] = heap.top();
        heap.pop();
        if (settled[j])
            continue;  // stale entry
        settled[j] = true;
        settle_order.push_back(j);
        if (std::isinf(dist[j]))
            continue;

        for (std::size_t q = 0; q < rates.size(); ++q) {
            const std::size_t r = rates[q];
            for (const LinkRef& edge : g.in_links(j, r)) {
                const NodeId i = edge.node;
                if (i == destination)
                    continue;
                PrefixState& prefix = state[q][i];
                if (!(prefix.cost > dist[j]))
                    continue;
                prefix.admit(g, i, r, j, edge.ratio, dist[j], metric, observer);
                // Settled nodes keep refining per-rate estimates, but their
                // global cost is final.
                if (!settled[i] && dist[i] > prefix.cost) {
                    dist[i] = prefix.cost;
                    tx_rate[i] = r;
                    heap.push({dist[i], i});
                }
            }
        }
    }

    RoutingTable table;
    table.destination = destination;
    table.metric = metric;
    if (!multirate)
        table.fixed_rate = rates.front();
    table.cost = dist;
    table.tx_rate = std::move(tx_rate);
    table.settle_order = std::move(settle_order);
    table.fset.resize(n);
    for (NodeId v = 0; v < n; ++v) {
        if (v == destination || !table.tx_rate[v])
            continue;
        const std::size_t q = multirate ? *table.tx_rate[v] : 0;
        const std::size_t slot =
            multirate ? static_cast<std::size_t>(std::find(rates.begin(), rates.end(), q) -
                                                 rates.begin())
                      : 0;
        table.fset[v] = canonical_set(state[slot][v].members, dist);
    }
    if (multirate) {
        table.rate_cost.assign(g.rate_count(), std::vector<Cost>(n, kUnreachable));
        table.rate_fset.assign(g.rate_count(), std::vector<ForwardingSet>(n));
        for (std::size_t q = 0; q < rates.size(); ++q) {
            const std::size_t r = rates[q];
            for (NodeId v = 0; v < n; ++v) {
                if (v == destination) {
                    table.rate_cost[r][v] = 0.0;
                    continue;
                }
                table.rate_cost[r][v] = state[q][v].cost;
                table.rate_fset[r][v] = canonical_set(state[q][v].members, dist);
            }
        }
    }
    return table;
}

RoutingTable run_bellman_ford(const Graph& g, NodeId destination,
                              const std::vector<std::size_t>& rates, bool multirate,
                              MetricKind metric, const AdmissionObserver* observer) {
    check_destination(g, destination);
    const std::size_t n = g.node_count();

    std::vector<Cost> dist(n, kUnreachable);
    dist[destination] = 0.0;
    std::vector<std::vector<Cost>> rate_dist(rates.size(), std::vector<Cost>(n, kUnreachable));
    std::vector<std::vector<std::vector<NodeId>>> rate_sets(
        rates.size(), std::vector<std::vector<NodeId>>(n));
    std::vector<std::optional<std::size_t>> tx_rate(n);

    // Union of out-neighbors across the solved rates, per node.
    std::vector<std::vector<NodeId>> neighbors(n);
    for (NodeId v = 0; v < n; ++v) {
        std::vector<NodeId>& list = neighbors[v];
        for (std::size_t q = 0; q < rates.size(); ++q)
            for (const LinkRef& edge : g.out_links(v, rates[q]))
                list.push_back(edge.node);
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
    }

    int rounds_used = 0;
    std::vector<NodeId> order;
    std::vector<PrefixState> chain(rates.size());
    for (std::size_t round = 1; round + 1 <= n; ++round) {
        bool changed = false;
        std::vector<Cost> next_dist = dist;
        auto next_rate_dist = rate_dist;

        for (NodeId i = 0; i < n; ++i) {
            if (i == destination || neighbors[i].empty())
                continue;
            // Previous-round snapshot governs both the candidate order and
            // every cost on the right-hand side of an update.
            order.clear();
            for (NodeId j : neighbors[i])
                if (!std::isinf(dist[j]))
                    order.push_back(j);
            if (order.empty())
                continue;
            std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
                if (dist[a] != dist[b])
                    return dist[a] < dist[b];
                return a < b;
            });

            for (std::size_t q = 0; q < rates.size(); ++q) {
                chain[q] = PrefixState{};
                chain[q].cost = rate_dist[q][i];
            }
            for (NodeId j : order) {
                for (std::size_t q = 0; q < rates.size(); ++q) {
                    const double link = g.link_ratio(i, j, rates[q]);
                    if (link <= 0.0)
                        continue;
                    if (!(chain[q].cost > dist[j]))
                        continue;
                    chain[q].admit(g, i, rates[q], j, link, dist[j], metric, observer);
                }
            }
            for (std::size_t q = 0; q < rates.size(); ++q) {
                if (chain[q].members.empty())
                    continue;
                // A rebuilt prefix can never land above the previous estimate
                // while neighbor costs only shrink.
                assert(chain[q].cost <= rate_dist[q][i] * (1 + 1e-12) ||
                       std::isinf(rate_dist[q][i]));
                if (chain[q].cost < rate_dist[q][i]) {
                    next_rate_dist[q][i] = chain[q].cost;
                    rate_sets[q][i] = chain[q].members;
                    changed = true;
                }
                if (next_rate_dist[q][i] < next_dist[i]) {
                    next_dist[i] = next_rate_dist[q][i];
                    tx_rate[i] = rates[q];
                    changed = true;
                }
            }
        }

        dist = std::move(next_dist);
        rate_dist = std::move(next_rate_dist);
        if (!changed)
            break;
        rounds_used = static_cast<int>(round);
    }

    RoutingTable table;
    table.destination = destination;
    table.metric = metric;
    if (!multirate)
        table.fixed_rate = rates.front();
    table.cost = dist;
    table.tx_rate = std::move(tx_rate);
    table.rounds = rounds_used;
    table.fset.resize(n);
    for (NodeId v = 0; v < n; ++v) {
        if (v == destination || !table.tx_rate[v])
            continue;
        const std::size_t slot =
            multirate ? static_cast<std::size_t>(std::find(rates.begin(), rates.end(),
                                                           *table.tx_rate[v]) -
                                                 rates.begin())
                      : 0;
        table.fset[v] = canonical_set(rate_sets[slot][v], dist);
    }
    if (multirate) {
        table.rate_cost.assign(g.rate_count(), std::vector<Cost>(n, kUnreachable));
        table.rate_fset.assign(g.rate_count(), std::vector<ForwardingSet>(n));
        for (std::size_t q = 0; q < rates.size(); ++q) {
            const std::size_t r = rates[q];
            for (NodeId v = 0; v < n; ++v) {
                if (v == destination) {
                    table.rate_cost[r][v] = 0.0;
                    continue;
                }
                table.rate_cost[r][v] = rate_dist[q][v];
                table.rate_fset[r][v] = canonical_set(rate_sets[q][v], dist);
            }
        }
    }
    return table;
}

std::vector<std::size_t> all_rates(const Graph& g) {
    std::vector<std::size_t> rates(g.rate_count());
    for (std::size_t r = 0; r < rates.size(); ++r)
        rates[r] = r;
    return rates;
}

void check_rate(const Graph& g, std::size_t rate) {
    if (rate >= g.rate_count())
        throw std::invalid_argument("rate index out of range");
}

}  // namespace

RoutingTable shortest_anypath_first(const Graph& g, NodeId destination, std::size_t rate,
                                    MetricKind metric, const AdmissionObserver* observer) {
    check_rate(g, rate);
    return run_dijkstra(g, destination, {rate}, false, metric, observer);
}

RoutingTable anypath_bellman_ford(const Graph& g, NodeId destination, std::size_t rate,
                                  MetricKind metric, const AdmissionObserver* observer) {
    check_rate(g, rate);
    return run_bellman_ford(g, destination, {rate}, false, metric, observer);
}

RoutingTable shortest_multirate_anypath_first(const Graph& g, NodeId destination,
                                              MetricKind metric,
                                              const AdmissionObserver* observer) {
    return run_dijkstra(g, destination, all_rates(g), true, metric, observer);
}

RoutingTable multirate_anypath_bellman_ford(const Graph& g, NodeId destination, MetricKind metric,
                                            const AdmissionObserver* observer) {
    return run_bellman_ford(g, destination, all_rates(g), true, metric, observer);
}

std::string format_cost(Cost cost, MetricKind metric) {
    if (std::isinf(cost))
        return "inf";
    return format_double(metric.id == MetricId::Eatt ? cost * 1e3 : cost);
}

void write_table_csv(std::ostream& out, const Graph& g, const RoutingTable& table) {
    out << "node,cost,rate,forwarding_set\n";
    for (NodeId v = 0; v < g.node_count(); ++v) {
        out << v << ',' << format_cost(table.cost[v], table.metric) << ',';
        if (table.tx_rate[v])
            out << g.rate_bps(*table.tx_rate[v]);
        out << ',';
        const auto& members = table.fset[v].members;
        for (std::size_t k = 0; k < members.size(); ++k) {
            if (k)
                out << ';';
            out << members[k];
        }
        out << '\n';
    }
}

std::optional<TableMismatch> compare_tables(const RoutingTable& a, const RoutingTable& b,
                                            double tolerance) {
    if (a.cost.size() != b.cost.size())
        return TableMismatch{0, "node_count", std::to_string(a.cost.size()),
                             std::to_string(b.cost.size())};
    if (a.destination != b.destination)
        return TableMismatch{0, "destination", std::to_string(a.destination),
                             std::to_string(b.destination)};
    for (NodeId v = 0; v < a.cost.size(); ++v) {
        const Cost ca = a.cost[v];
        const Cost cb = b.cost[v];
        const bool both_inf = std::isinf(ca) && std::isinf(cb);
        if (!both_inf && !(std::abs(ca - cb) <= tolerance))
            return TableMismatch{v, "cost", format_double(ca), format_double(cb)};
        if (a.fset[v].members != b.fset[v].members) {
            auto show = [](const ForwardingSet& s) {
                std::string txt;
                for (NodeId m : s.members)
                    txt += (txt.empty() ? "" : ";") + std::to_string(m);
                return txt.empty() ? std::string("-") : txt;
            };
            return TableMismatch{v, "forwarding_set", show(a.fset[v]), show(b.fset[v])};
        }
        if (v != a.destination && !std::isinf(ca)) {
            const auto ra = a.tx_rate[v];
            const auto rb = b.tx_rate[v];
            if (ra != rb) {
                auto show = [](const std::optional<std::size_t>& r) {
                    return r ? std::to_string(*r) : std::string("-");
                };
                return TableMismatch{v, "rate", show(ra), show(rb)};
            }
        }
    }
    return std::nullopt;
}

}  // namespace anypath
