#include "anypath/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "anypath/parallel.hpp"

namespace anypath {

CostMatrix all_pairs_costs(const Graph& g, std::optional<std::size_t> fixed_rate, MetricKind m,
                           unsigned jobs) {
    const std::size_t n = g.node_count();
    CostMatrix matrix;
    matrix.at.assign(n, std::vector<Cost>(n, kUnreachable));
    parallel_for(n, jobs, [&](std::size_t dest) {
        const RoutingTable table =
            fixed_rate ? shortest_anypath_first(g, static_cast<NodeId>(dest), *fixed_rate, m)
                       : shortest_multirate_anypath_first(g, static_cast<NodeId>(dest), m);
        for (std::size_t src = 0; src < n; ++src)
            matrix.at[src][dest] = table.cost[src];
    });
    return matrix;
}

GainDistribution gain_distribution(const Graph& g, std::size_t fixed_rate, MetricKind m,
                                   unsigned jobs) {
    const CostMatrix single = all_pairs_costs(g, fixed_rate, m, jobs);
    const CostMatrix multi = all_pairs_costs(g, std::nullopt, m, jobs);
    const std::size_t n = g.node_count();

    GainDistribution gains;
    gains.fixed_rate = g.rate_bps(fixed_rate);
    for (NodeId src = 0; src < n; ++src) {
        for (NodeId dst = 0; dst < n; ++dst) {
            if (src == dst)
                continue;
            const Cost fixed_cost = single.at[src][dst];
            const Cost multi_cost = multi.at[src][dst];
            if (std::isinf(multi_cost)) {
                ++gains.unreachable_pairs;  // unreachable at any rate
                continue;
            }
            if (std::isinf(fixed_cost)) {
                gains.infinite.push_back({src, dst, kUnreachable});
                continue;
            }
            gains.finite.push_back({src, dst, fixed_cost / multi_cost});
        }
    }
    std::sort(gains.finite.begin(), gains.finite.end(), [](const GainRecord& a,
                                                           const GainRecord& b) {
        if (a.gain != b.gain)
            return a.gain > b.gain;
        return std::tie(a.source, a.destination) < std::tie(b.source, b.destination);
    });
    return gains;
}

std::vector<double> rate_histogram(const Graph& g, MetricKind m, unsigned jobs) {
    const std::size_t n = g.node_count();
    std::vector<std::vector<std::uint64_t>> votes(n,
                                                  std::vector<std::uint64_t>(g.rate_count(), 0));
    parallel_for(n, jobs, [&](std::size_t dest) {
        const RoutingTable table = shortest_multirate_anypath_first(g, static_cast<NodeId>(dest), m);
        for (NodeId v = 0; v < n; ++v) {
            if (v == dest || std::isinf(table.cost[v]) || !table.tx_rate[v])
                continue;
            ++votes[dest][*table.tx_rate[v]];
        }
    });
    std::vector<std::uint64_t> tally(g.rate_count(), 0);
    std::uint64_t total = 0;
    for (const auto& column : votes) {
        for (std::size_t r = 0; r < column.size(); ++r) {
            tally[r] += column[r];
            total += column[r];
        }
    }
    std::vector<double> fractions(g.rate_count(), 0.0);
    if (total == 0)
        return fractions;
    for (std::size_t r = 0; r < g.rate_count(); ++r)
        fractions[r] = static_cast<double>(tally[r]) / static_cast<double>(total);
    return fractions;
}

ConnectivityReport connectivity_report(const Graph& g, MetricKind m, unsigned jobs) {
    const std::size_t n = g.node_count();
    ConnectivityReport report;
    report.fraction_connected.assign(g.rate_count(), 0.0);
    report.rank_curves.resize(g.rate_count());

    for (std::size_t r = 0; r < g.rate_count(); ++r) {
        std::vector<std::uint64_t> reachable(n, 0);
        parallel_for(n, jobs, [&](std::size_t dest) {
            const RoutingTable table = shortest_anypath_first(g, static_cast<NodeId>(dest), r, m);
            std::uint64_t count = 0;
            for (NodeId v = 0; v < n; ++v)
                if (v != dest && !std::isinf(table.cost[v]))
                    ++count;
            reachable[dest] = count;
        });
        std::uint64_t connected = 0;
        for (std::uint64_t c : reachable)
            connected += c;
        const std::uint64_t pairs = static_cast<std::uint64_t>(n) * (n - 1);
        report.fraction_connected[r] =
            pairs == 0 ? 1.0 : static_cast<double>(connected) / static_cast<double>(pairs);

        std::vector<double>& curve = report.rank_curves[r];
        for (NodeId v = 0; v < n; ++v)
            for (const LinkRef& edge : g.out_links(v, r))
                curve.push_back(edge.ratio);
        std::sort(curve.begin(), curve.end(), std::greater<double>());
    }
    return report;
}

void write_cost_matrix_csv(std::ostream& out, const CostMatrix& matrix, MetricKind m) {
    for (const auto& row : matrix.at) {
        for (std::size_t d = 0; d < row.size(); ++d) {
            if (d)
                out << ',';
            out << format_cost(row[d], m);
        }
        out << '\n';
    }
}

void write_gains_csv(std::ostream& out, const GainDistribution& gains) {
    out << "src,dst,gain\n";
    for (const GainRecord& rec : gains.infinite)
        out << rec.source << ',' << rec.destination << ",inf\n";
    for (const GainRecord& rec : gains.finite)
        out << rec.source << ',' << rec.destination << ',' << format_double(rec.gain) << '\n';
}

void write_rate_histogram_csv(std::ostream& out, const Graph& g,
                              const std::vector<double>& fractions) {
    out << "rate,fraction\n";
    for (std::size_t r = 0; r < fractions.size(); ++r)
        out << g.rate_bps(r) << ',' << format_double(fractions[r]) << '\n';
}

void write_connectivity_csv(std::ostream& out, const Graph& g, const ConnectivityReport& report) {
    out << "rate,fraction_connected\n";
    for (std::size_t r = 0; r < report.fraction_connected.size(); ++r)
        out << g.rate_bps(r) << ',' << format_double(report.fraction_connected[r]) << '\n';
}

void write_rank_curve_csv(std::ostream& out, const std::vector<double>& curve) {
    out << "rank,delivery_ratio\n";
    for (std::size_t k = 0; k < curve.size(); ++k)
        out << (k + 1) << ',' << format_double(curve[k]) << '\n';
}

}  // namespace anypath
