#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "anypath/graph.hpp"
#include "anypath/metrics.hpp"
#include "anypath/rng.hpp"
#include "anypath/solvers.hpp"

namespace anypath {

/// Ground truth produced by exhaustive search, structurally identical to a
/// solver table.
using OracleTable = RoutingTable;

/// Out-degree bound (per node, per rate) for subset enumeration.
inline constexpr std::size_t kOracleDegreeBound = 15;

/// Exact optimum by synchronous value iteration: |V|-1 rounds, each round
/// minimizing over every non-empty out-neighbor subset and every rate against
/// the previous round's costs. Deliberately never assumes the optimal set is
/// a cost-sorted prefix. fixed_rate nullopt solves the joint set+rate problem.
OracleTable brute_force_optimal(const Graph& g, NodeId destination, MetricKind metric,
                                std::optional<std::size_t> fixed_rate);

struct SimulationReport {
    std::uint64_t trials = 0;
    double mean_cost = 0.0;   // transmissions (Eatx) or seconds (Eatt)
    double std_error = 0.0;   // sample stddev / sqrt(delivered trials)
    std::uint64_t delivery_failures = 0;
    double mean_hops = 0.0;
    std::uint64_t seed = 0;
};

inline constexpr std::uint32_t kDefaultRetransmissionCap = 1000;

/// Monte Carlo packet walks from `source` along a routing table: broadcast at
/// the node's rate, the lowest-cost receiver relays, repeat until the
/// destination or `cap` transmissions on one hop. Trial k draws from RNG
/// stream (seed, k), so reports are reproducible and schedule-independent.
SimulationReport simulate_delivery(const Graph& g, const RoutingTable& table, NodeId source,
                                   std::uint64_t trials, std::uint32_t cap, std::uint64_t seed,
                                   unsigned jobs = 1);

/// One broadcast outcome: which members of `set` received. Joint models are
/// sampled by pmf and marginalized onto the set; everything else is
/// independent Bernoulli per member. Returned in the set's order.
std::vector<NodeId> sample_reception(const Graph& g, NodeId i, std::span<const NodeId> set,
                                     std::size_t rate, Rng& rng);

/// Observed pmf of a joint model next to the pmf implied by independent
/// per-receiver marginals, plus how far apart they are.
struct IndependenceReport {
    std::vector<double> observed;
    std::vector<double> product;
    double total_variation = 0.0;  // half the L1 distance
    double max_deviation = 0.0;    // largest per-subset difference
};

IndependenceReport independence_report(const JointReceptionModel& model);

/// CSV row `source,dest,trials,mean,stderr,failures,mean_hops,seed` matching
/// the table's metric units (ms for Eatt).
std::string simulation_csv_row(const SimulationReport& report, NodeId source, NodeId dest,
                               MetricKind metric);

}  // namespace anypath
