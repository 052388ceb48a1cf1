#include "anypath/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace anypath {

namespace {

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

// Per-member view of which loss law governs it.
struct MemberLaw {
    double ratio;  // independent delivery ratio (unused when modeled)
    int bit;       // bit in the joint model, or -1 when independent
};

std::vector<MemberLaw> resolve_members(const Graph& g, NodeId i, std::span<const NodeId> set,
                                       std::size_t rate, const JointReceptionModel* model) {
    std::vector<MemberLaw> laws;
    laws.reserve(set.size());
    for (NodeId j : set) {
        const double ratio = g.link_ratio(i, j, rate);
        if (ratio <= 0.0)
            throw std::invalid_argument("forwarding-set member " + std::to_string(j) +
                                        " is not a neighbor of " + std::to_string(i) +
                                        " at this rate");
        laws.push_back({ratio, model ? model->neighbor_bit(j) : -1});
    }
    return laws;
}

}  // namespace

double hyperlink_delivery_ratio(const Graph& g, NodeId i, std::span<const NodeId> set,
                                std::size_t rate) {
    if (set.empty())
        throw std::invalid_argument("forwarding set must be non-empty");
    const JointReceptionModel* model = g.joint_model(i, rate);
    const std::vector<MemberLaw> laws = resolve_members(g, i, set, rate, model);

    double independent_loss = 1.0;
    std::uint32_t modeled = 0;
    for (const MemberLaw& law : laws) {
        if (law.bit >= 0)
            modeled |= 1u << law.bit;
        else
            independent_loss *= 1.0 - law.ratio;
    }
    const double modeled_loss = modeled ? model->loss_probability(modeled) : 1.0;
    return clamp01(1.0 - modeled_loss * independent_loss);
}

WeightVector relay_weights(const Graph& g, NodeId i, std::span<const NodeId> set,
                           std::size_t rate) {
    if (set.empty())
        throw std::invalid_argument("forwarding set must be non-empty");
    const double p_set = hyperlink_delivery_ratio(g, i, set, rate);
    if (p_set <= 0.0)
        throw std::invalid_argument("relay weights undefined: hyperlink delivery ratio is 0");
    if (set.size() == 1)
        return WeightVector{{1.0}};  // sole receiver always relays
    const JointReceptionModel* model = g.joint_model(i, rate);
    const std::vector<MemberLaw> laws = resolve_members(g, i, set, rate, model);

    WeightVector result;
    result.weights.reserve(set.size());
    double prefix_independent_loss = 1.0;  // over unmodeled members before q
    std::uint32_t prefix_modeled = 0;      // modeled members before q
    for (std::size_t q = 0; q < laws.size(); ++q) {
        const MemberLaw& law = laws[q];
        // P[every higher-priority member loses and member q receives]
        double event;
        if (law.bit >= 0) {
            event = model->receive_probability(prefix_modeled, law.bit) * prefix_independent_loss;
            prefix_modeled |= 1u << law.bit;
        } else {
            const double modeled_loss =
                prefix_modeled ? model->loss_probability(prefix_modeled) : 1.0;
            event = modeled_loss * prefix_independent_loss * law.ratio;
            prefix_independent_loss *= 1.0 - law.ratio;
        }
        result.weights.push_back(clamp01(event / p_set));
    }
    return result;
}

Cost remaining_cost(const WeightVector& w, std::span<const Cost> costs) {
    if (w.weights.size() != costs.size())
        throw std::invalid_argument("weight/cost length mismatch");
    double total = 0.0;
    for (std::size_t q = 0; q < costs.size(); ++q) {
        if (w.weights[q] == 0.0)
            continue;  // zero-weight members never contribute (0 * inf)
        if (std::isinf(costs[q]))
            return kUnreachable;
        total += w.weights[q] * costs[q];
    }
    return total;
}

Cost hyperlink_cost_from_ratio(double ratio, const Graph& g, std::size_t rate, MetricKind m) {
    if (ratio <= 0.0)
        return kUnreachable;
    const double transmissions = 1.0 / ratio;
    if (m.id == MetricId::Eatx)
        return transmissions;
    const double airtime = static_cast<double>(m.packet_size_bits) /
                           static_cast<double>(g.rate_bps(rate));
    return transmissions * airtime;  // seconds
}

Cost hyperlink_cost(const Graph& g, NodeId i, std::span<const NodeId> set, std::size_t rate,
                    MetricKind m) {
    return hyperlink_cost_from_ratio(hyperlink_delivery_ratio(g, i, set, rate), g, rate, m);
}

Cost anypath_cost(const Graph& g, NodeId i, std::span<const NodeId> set, std::size_t rate,
                  std::span<const Cost> remote_costs, MetricKind m) {
    const double p_set = hyperlink_delivery_ratio(g, i, set, rate);
    if (p_set <= 0.0)
        return kUnreachable;
    return hyperlink_cost_from_ratio(p_set, g, rate, m) +
           remaining_cost(relay_weights(g, i, set, rate), remote_costs);
}

Cost incremental_update(Cost current, double p_old, double p_new, Cost added_cost) {
    if (!(p_old > 0.0))
        throw std::invalid_argument("incremental update needs a non-empty current set");
    if (p_new < p_old)
        throw std::invalid_argument("adding a receiver cannot lower the delivery ratio");
    const double keep = p_old / p_new;
    if (keep >= 1.0)
        return current;  // zero-weight newcomer
    return keep * current + (1.0 - keep) * added_cost;
}

}  // namespace anypath
