#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "anypath/graph.hpp"
#include "anypath/metrics.hpp"
#include "anypath/solvers.hpp"

namespace anypath {

/// at[src][dest]; diagonal is 0, unreachable pairs +inf.
struct CostMatrix {
    std::vector<std::vector<Cost>> at;
};

/// One solver run per destination; fixed_rate nullopt solves multirate.
CostMatrix all_pairs_costs(const Graph& g, std::optional<std::size_t> fixed_rate, MetricKind m,
                           unsigned jobs = 1);

/// How much the joint set+rate optimum beats the best anypath pinned to one
/// rate, for one ordered pair.
struct GainRecord {
    NodeId source = 0;
    NodeId destination = 0;
    double gain = 1.0;  // single-rate cost / multirate cost; >= 1
};

struct GainDistribution {
    RateBps fixed_rate = 0;
    std::vector<GainRecord> finite;    // descending gain (CDF emission order)
    std::vector<GainRecord> infinite;  // connected only when rates may differ
    std::size_t unreachable_pairs = 0;  // unreachable either way; excluded
};

GainDistribution gain_distribution(const Graph& g, std::size_t fixed_rate, MetricKind m,
                                   unsigned jobs = 1);

/// Fraction of (node, destination) optimal-rate selections per rate index,
/// over pairs with finite cost. Sums to 1 when any such pair exists.
std::vector<double> rate_histogram(const Graph& g, MetricKind m, unsigned jobs = 1);

struct ConnectivityReport {
    // Per rate: fraction of ordered pairs with a finite fixed-rate cost.
    std::vector<double> fraction_connected;
    // Per rate: link delivery ratios in rank order (largest first).
    std::vector<std::vector<double>> rank_curves;
};

ConnectivityReport connectivity_report(const Graph& g, MetricKind m, unsigned jobs = 1);

void write_cost_matrix_csv(std::ostream& out, const CostMatrix& matrix, MetricKind m);
void write_gains_csv(std::ostream& out, const GainDistribution& gains);
void write_rate_histogram_csv(std::ostream& out, const Graph& g,
                              const std::vector<double>& fractions);
void write_connectivity_csv(std::ostream& out, const Graph& g, const ConnectivityReport& report);
void write_rank_curve_csv(std::ostream& out, const std::vector<double>& curve);

}  // namespace anypath
