#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "anypath/rng.hpp"

namespace anypath {

using NodeId = std::uint32_t;
using RateBps = std::uint64_t;   // transmission rate in bits per second
using Cost = double;             // non-negative; +inf marks unreachable

inline constexpr Cost kUnreachable = std::numeric_limits<double>::infinity();
inline constexpr std::int64_t kDefaultPacketBits = 12000;  // 1500 bytes

struct ParseError : std::runtime_error {
    ParseError(int line_number, const std::string& message)
        : std::runtime_error("line " + std::to_string(line_number) + ": " + message),
          line(line_number) {}
    int line;
};

/// Explicit joint reception law for one (node, rate): a pmf over receiver
/// subsets of the listed neighbors, indexed by bitmask where bit k set means
/// neighbors[k] received. Covers correlated losses; absent neighbors stay
/// independent Bernoulli.
struct JointReceptionModel {
    static constexpr std::size_t kMaxNeighbors = 12;

    NodeId node = 0;
    RateBps rate = 0;
    std::vector<NodeId> neighbors;
    std::vector<double> pmf;  // size 1 << neighbors.size(), sums to 1

    int neighbor_bit(NodeId j) const {
        for (std::size_t k = 0; k < neighbors.size(); ++k)
            if (neighbors[k] == j)
                return static_cast<int>(k);
        return -1;
    }

    // P[every neighbor in `members` loses]; members is a bitmask.
    double loss_probability(std::uint32_t members) const {
        double total = 0.0;
        for (std::size_t mask = 0; mask < pmf.size(); ++mask)
            if ((mask & members) == 0)
                total += pmf[mask];
        return total;
    }

    // P[every neighbor in `losers` loses and neighbors[receiver] receives].
    double receive_probability(std::uint32_t losers, int receiver) const {
        const std::uint32_t bit = 1u << receiver;
        double total = 0.0;
        for (std::size_t mask = 0; mask < pmf.size(); ++mask)
            if ((mask & losers) == 0 && (mask & bit) != 0)
                total += pmf[mask];
        return total;
    }

    double marginal(int bit) const {
        const std::uint32_t flag = 1u << bit;
        double total = 0.0;
        for (std::size_t mask = 0; mask < pmf.size(); ++mask)
            if (mask & flag)
                total += pmf[mask];
        return total;
    }

    void validate() const;  // throws std::invalid_argument
};

struct LinkSpec {
    NodeId src = 0;
    NodeId dst = 0;
    RateBps rate = 0;
    double ratio = 0.0;  // delivery probability in (0, 1]; 0 means "no link"

    friend bool operator==(const LinkSpec&, const LinkSpec&) = default;
};

/// One endpoint of a link at a fixed rate: the far node and the delivery
/// ratio. Used for both out-edge (node = dst) and in-edge (node = src) views.
struct LinkRef {
    NodeId node = 0;
    double ratio = 0.0;
};

/// Immutable mesh topology: per-rate directed links with delivery ratios plus
/// optional joint reception models. Safe for concurrent reads once built.
class Graph {
public:
    Graph(std::size_t node_count,
          std::vector<RateBps> rates,
          std::vector<LinkSpec> links,
          std::vector<JointReceptionModel> joints = {},
          std::int64_t packet_size_bits = kDefaultPacketBits);

    std::size_t node_count() const { return node_count_; }
    std::size_t rate_count() const { return rates_.size(); }
    const std::vector<RateBps>& rates() const { return rates_; }
    RateBps rate_bps(std::size_t rate) const { return rates_[rate]; }
    std::int64_t packet_size_bits() const { return packet_size_bits_; }

    /// Index of a rate value; throws std::invalid_argument if not declared.
    std::size_t rate_index(RateBps rate) const;

    std::span<const LinkRef> out_links(NodeId i, std::size_t rate) const {
        return out_[rate][i];
    }
    std::span<const LinkRef> in_links(NodeId j, std::size_t rate) const {
        return in_[rate][j];
    }

    /// Delivery ratio of link i -> j at a rate; 0 when absent.
    double link_ratio(NodeId i, NodeId j, std::size_t rate) const;

    /// Joint reception model covering (i, rate), or nullptr.
    const JointReceptionModel* joint_model(NodeId i, std::size_t rate) const {
        const int idx = joint_at_[rate][i];
        return idx < 0 ? nullptr : &joints_[static_cast<std::size_t>(idx)];
    }

    std::span<const JointReceptionModel> joint_models() const { return joints_; }

    /// All links in canonical (src, dst, rate) order.
    std::vector<LinkSpec> links() const;

    std::size_t link_count(std::size_t rate) const;

    bool operator==(const Graph& other) const;

private:
    std::size_t node_count_;
    std::vector<RateBps> rates_;
    std::vector<std::vector<std::vector<LinkRef>>> out_;  // [rate][node]
    std::vector<std::vector<std::vector<LinkRef>>> in_;   // [rate][node]
    std::vector<JointReceptionModel> joints_;
    std::vector<std::vector<int>> joint_at_;               // [rate][node] -> joints_ index
    std::int64_t packet_size_bits_;
};

/// Parses the line-oriented graph file format:
///   nodes <N>
///   rates <r1> <r2> ...
///   link <src> <dst> <rate> <ratio>
///   joint <node> <rate> <k> <nbr_1..nbr_k> <p_0 ... p_{2^k-1}>
/// '#' starts a comment. Rate tokens must evaluate to integral bits/s
/// ("11e6" is fine, "5.5" is not). Throws ParseError with the line number.
Graph parse_graph(std::string_view text);

/// Canonical serialization; parse(serialize(g)) == g and serialize is a
/// fixed point over parse.
std::string serialize_graph(const Graph& g);

/// Link-ratio distribution for the synthetic generator.
struct RatioLaw {
    enum class Kind { Constant, Uniform, DecayingUniform };

    Kind kind = Kind::DecayingUniform;
    double lo = 0.2;      // Constant uses lo as the value
    double hi = 1.0;
    double decay = 0.6;   // DecayingUniform: draw scales by decay^rate_index

    // "constant:<v>" | "uniform:<lo>:<hi>" | "decaying[:<lo>:<hi>[:<factor>]]"
    // ("rate-decaying-uniform" is accepted as an alias for "decaying").
    static RatioLaw parse(std::string_view spec);
    std::string to_string() const;

    double sample(Rng& rng, std::size_t rate_idx) const;
};

/// Seed-deterministic random topology: every ordered pair gets a link at each
/// rate with probability `density`, ratio drawn from `law`. DecayingUniform
/// makes higher rates stochastically lossier, so rate sweeps thin out the
/// usable topology the way real multirate meshes do.
Graph generate_random_graph(std::size_t node_count,
                            const std::vector<RateBps>& rates,
                            double density,
                            const RatioLaw& law,
                            std::uint64_t seed,
                            std::int64_t packet_size_bits = kDefaultPacketBits);

/// Shortest round-trip decimal form of a double ("inf" for +infinity).
std::string format_double(double value);

/// Rate token -> integral bits/s; accepts decimal/scientific forms that are
/// exactly integral. Returns nullopt on anything else.
std::optional<RateBps> parse_rate_token(std::string_view token);

}  // namespace anypath
