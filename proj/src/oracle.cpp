#include "anypath/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "anypath/parallel.hpp"

namespace anypath {

namespace {

std::vector<std::size_t> rates_in_scope(const Graph& g, std::optional<std::size_t> fixed_rate) {
    if (fixed_rate) {
        if (*fixed_rate >= g.rate_count())
            throw std::invalid_argument("rate index out of range");
        return {*fixed_rate};
    }
    std::vector<std::size_t> rates(g.rate_count());
    for (std::size_t r = 0; r < rates.size(); ++r)
        rates[r] = r;
    return rates;
}

struct Candidate {
    Cost cost = kUnreachable;
    std::vector<NodeId> members;
    std::size_t rate = 0;
};

// Minimum anypath cost from i over every non-empty subset of every rate's
// out-neighbors, member costs taken from `dist`. First strictly-better
// candidate wins, enumerated in (rate, popcount-free mask order).
Candidate best_candidate(const Graph& g, NodeId i, std::span<const std::size_t> rates,
                         std::span<const Cost> dist, MetricKind metric) {
    Candidate best;
    std::vector<NodeId> sorted;
    std::vector<NodeId> members;
    std::vector<Cost> member_costs;
    for (std::size_t r : rates) {
        sorted.clear();
        for (const LinkRef& edge : g.out_links(i, r))
            if (!std::isinf(dist[edge.node]))
                sorted.push_back(edge.node);
        if (sorted.empty())
            continue;
        std::sort(sorted.begin(), sorted.end(), [&](NodeId a, NodeId b) {
            if (dist[a] != dist[b])
                return dist[a] < dist[b];
            return a < b;
        });
        const std::uint32_t subsets = 1u << sorted.size();
        for (std::uint32_t mask = 1; mask < subsets; ++mask) {
            members.clear();
            member_costs.clear();
            for (std::size_t bit = 0; bit < sorted.size(); ++bit) {
                if (mask & (1u << bit)) {
                    members.push_back(sorted[bit]);
                    member_costs.push_back(dist[sorted[bit]]);
                }
            }
            const Cost cost = anypath_cost(g, i, members, r, member_costs, metric);
            if (cost < best.cost) {
                best.cost = cost;
                best.members = members;
                best.rate = r;
            }
        }
    }
    return best;
}

}  // namespace

OracleTable brute_force_optimal(const Graph& g, NodeId destination, MetricKind metric,
                                std::optional<std::size_t> fixed_rate) {
    if (destination >= g.node_count())
        throw std::invalid_argument("destination id out of range");
    const std::vector<std::size_t> rates = rates_in_scope(g, fixed_rate);
    for (NodeId v = 0; v < g.node_count(); ++v)
        for (std::size_t r : rates)
            if (g.out_links(v, r).size() > kOracleDegreeBound)
                throw std::invalid_argument(
                    "out-degree " + std::to_string(g.out_links(v, r).size()) + " of node " +
                    std::to_string(v) + " exceeds the subset-enumeration bound " +
                    std::to_string(kOracleDegreeBound));

    const std::size_t n = g.node_count();
    std::vector<Cost> dist(n, kUnreachable);
    dist[destination] = 0.0;

    for (std::size_t round = 1; round + 1 <= n; ++round) {
        std::vector<Cost> next = dist;
        for (NodeId i = 0; i < n; ++i) {
            if (i == destination)
                continue;
            const Candidate c = best_candidate(g, i, rates, dist, metric);
            next[i] = std::min(dist[i], c.cost);
        }
        dist = std::move(next);
    }

    OracleTable table;
    table.destination = destination;
    table.metric = metric;
    table.fixed_rate = fixed_rate;
    table.cost = dist;
    table.fset.resize(n);
    table.tx_rate.resize(n);
    table.rounds = static_cast<int>(n - 1);
    // Sets and rates extracted at the fixed point the rounds converged to.
    for (NodeId i = 0; i < n; ++i) {
        if (i == destination || std::isinf(dist[i]))
            continue;
        Candidate c = best_candidate(g, i, rates, dist, metric);
        table.fset[i] = ForwardingSet{std::move(c.members)};
        table.tx_rate[i] = c.rate;
    }
    return table;
}

namespace {

struct HopPlan {
    bool valid = false;          // has a forwarding set and a rate
    double attempt_cost = 0.0;   // cost charged per broadcast
    std::vector<NodeId> members;          // priority order
    std::vector<double> ratios;           // independent ratio per member
    std::vector<int> model_bit;           // bit in joint model, -1 if independent
    const JointReceptionModel* model = nullptr;
    std::vector<double> model_cdf;        // inclusive prefix sums of the pmf
};

std::uint32_t sample_model_mask(const std::vector<double>& cdf, Rng& rng) {
    const double u = rng.next_double();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    return static_cast<std::uint32_t>(std::min<std::size_t>(
        static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1));
}

std::vector<double> build_cdf(const JointReceptionModel& model) {
    std::vector<double> cdf(model.pmf.size());
    double run = 0.0;
    for (std::size_t k = 0; k < model.pmf.size(); ++k) {
        run += model.pmf[k];
        cdf[k] = run;
    }
    return cdf;
}

// Index of the relaying member (first receiver in priority order), or -1.
int sample_relay(const HopPlan& hop, Rng& rng) {
    std::uint32_t model_mask = 0;
    bool drew_mask = false;
    int relay = -1;
    for (std::size_t q = 0; q < hop.members.size(); ++q) {
        bool received;
        if (hop.model_bit[q] >= 0) {
            if (!drew_mask) {
                model_mask = sample_model_mask(hop.model_cdf, rng);
                drew_mask = true;
            }
            received = (model_mask >> hop.model_bit[q]) & 1u;
        } else {
            received = rng.bernoulli(hop.ratios[q]);
        }
        if (received && relay < 0)
            relay = static_cast<int>(q);
    }
    return relay;
}

}  // namespace

std::vector<NodeId> sample_reception(const Graph& g, NodeId i, std::span<const NodeId> set,
                                     std::size_t rate, Rng& rng) {
    const JointReceptionModel* model = g.joint_model(i, rate);
    std::vector<double> cdf;
    std::uint32_t model_mask = 0;
    bool drew_mask = false;
    std::vector<NodeId> received;
    for (NodeId j : set) {
        const double ratio = g.link_ratio(i, j, rate);
        if (ratio <= 0.0)
            throw std::invalid_argument("set member is not a neighbor at this rate");
        const int bit = model ? model->neighbor_bit(j) : -1;
        bool got;
        if (bit >= 0) {
            if (!drew_mask) {
                cdf = build_cdf(*model);
                model_mask = sample_model_mask(cdf, rng);
                drew_mask = true;
            }
            got = (model_mask >> bit) & 1u;
        } else {
            got = rng.bernoulli(ratio);
        }
        if (got)
            received.push_back(j);
    }
    return received;
}

SimulationReport simulate_delivery(const Graph& g, const RoutingTable& table, NodeId source,
                                   std::uint64_t trials, std::uint32_t cap, std::uint64_t seed,
                                   unsigned jobs) {
    if (cap < 1)
        throw std::invalid_argument("retransmission cap must be at least 1");
    if (source >= g.node_count())
        throw std::invalid_argument("source id out of range");
    const MetricKind metric = table.metric;

    std::vector<HopPlan> plan(g.node_count());
    for (NodeId v = 0; v < g.node_count(); ++v) {
        if (v == table.destination || table.fset[v].empty() || !table.tx_rate[v])
            continue;
        HopPlan& hop = plan[v];
        const std::size_t rate = *table.tx_rate[v];
        hop.valid = true;
        hop.attempt_cost = metric.id == MetricId::Eatx
                               ? 1.0
                               : static_cast<double>(metric.packet_size_bits) /
                                     static_cast<double>(g.rate_bps(rate));
        hop.model = g.joint_model(v, rate);
        if (hop.model)
            hop.model_cdf = build_cdf(*hop.model);
        for (NodeId member : table.fset[v].members) {
            hop.members.push_back(member);
            hop.ratios.push_back(g.link_ratio(v, member, rate));
            hop.model_bit.push_back(hop.model ? hop.model->neighbor_bit(member) : -1);
        }
    }

    // Guards against a cyclic table looping forever; solver tables are DAGs
    // so delivered walks never get near it.
    const std::uint64_t hop_guard = 8 * std::max<std::uint64_t>(g.node_count(), 4);

    struct TrialResult {
        double cost = 0.0;
        std::uint64_t hops = 0;
        bool delivered = false;
    };
    std::vector<TrialResult> results(trials);

    parallel_for(trials, jobs, [&](std::size_t t) {
        Rng rng = Rng::stream(seed, t);
        TrialResult& res = results[t];
        NodeId node = source;
        while (node != table.destination) {
            const HopPlan& hop = plan[node];
            if (!hop.valid || res.hops >= hop_guard)
                return;  // stranded: counts as a delivery failure
            int relay = -1;
            std::uint32_t attempts = 0;
            while (attempts < cap) {
                ++attempts;
                res.cost += hop.attempt_cost;
                relay = sample_relay(hop, rng);
                if (relay >= 0)
                    break;
            }
            if (relay < 0)
                return;  // cap exhausted on this hop
            node = hop.members[static_cast<std::size_t>(relay)];
            ++res.hops;
        }
        res.delivered = true;
    });

    SimulationReport report;
    report.trials = trials;
    report.seed = seed;
    std::uint64_t delivered = 0;
    double cost_sum = 0.0;
    double hop_sum = 0.0;
    for (const TrialResult& res : results) {
        if (!res.delivered) {
            ++report.delivery_failures;
            continue;
        }
        ++delivered;
        cost_sum += res.cost;
        hop_sum += static_cast<double>(res.hops);
    }
    if (delivered > 0) {
        report.mean_cost = cost_sum / static_cast<double>(delivered);
        report.mean_hops = hop_sum / static_cast<double>(delivered);
    }
    if (delivered > 1) {
        double sq = 0.0;
        for (const TrialResult& res : results)
            if (res.delivered)
                sq += (res.cost - report.mean_cost) * (res.cost - report.mean_cost);
        const double variance = sq / static_cast<double>(delivered - 1);
        report.std_error = std::sqrt(variance / static_cast<double>(delivered));
    }
    return report;
}

IndependenceReport independence_report(const JointReceptionModel& model) {
    IndependenceReport report;
    report.observed = model.pmf;
    const std::size_t bits = model.neighbors.size();
    std::vector<double> marginals(bits);
    for (std::size_t b = 0; b < bits; ++b)
        marginals[b] = model.marginal(static_cast<int>(b));
    report.product.resize(model.pmf.size());
    for (std::size_t mask = 0; mask < model.pmf.size(); ++mask) {
        double p = 1.0;
        for (std::size_t b = 0; b < bits; ++b)
            p *= (mask >> b) & 1u ? marginals[b] : 1.0 - marginals[b];
        report.product[mask] = p;
    }
    double l1 = 0.0;
    for (std::size_t mask = 0; mask < model.pmf.size(); ++mask) {
        const double diff = std::abs(report.observed[mask] - report.product[mask]);
        l1 += diff;
        report.max_deviation = std::max(report.max_deviation, diff);
    }
    report.total_variation = l1 / 2.0;
    return report;
}

std::string simulation_csv_row(const SimulationReport& report, NodeId source, NodeId dest,
                               MetricKind metric) {
    const double scale = metric.id == MetricId::Eatt ? 1e3 : 1.0;
    std::string row;
    row += std::to_string(source) + "," + std::to_string(dest) + ",";
    row += std::to_string(report.trials) + ",";
    row += format_double(report.mean_cost * scale) + ",";
    row += format_double(report.std_error * scale) + ",";
    row += std::to_string(report.delivery_failures) + ",";
    row += format_double(report.mean_hops) + ",";
    row += std::to_string(report.seed);
    return row;
}

}  // namespace anypath
