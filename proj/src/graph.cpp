#include "anypath/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>

namespace anypath {

namespace {

constexpr double kPmfParseTolerance = 1e-6;

std::vector<LinkRef>::const_iterator find_link(const std::vector<LinkRef>& links, NodeId node) {
    auto it = std::lower_bound(links.begin(), links.end(), node,
                               [](const LinkRef& l, NodeId n) { return l.node < n; });
    if (it != links.end() && it->node == node)
        return it;
    return links.end();
}

}  // namespace

void JointReceptionModel::validate() const {
    if (neighbors.empty() || neighbors.size() > kMaxNeighbors)
        throw std::invalid_argument("joint model must list between 1 and " +
                                    std::to_string(kMaxNeighbors) + " neighbors");
    std::set<NodeId> unique(neighbors.begin(), neighbors.end());
    if (unique.size() != neighbors.size())
        throw std::invalid_argument("joint model neighbor list has duplicates");
    if (pmf.size() != (std::size_t{1} << neighbors.size()))
        throw std::invalid_argument("joint pmf size must be 2^k");
    double sum = 0.0;
    for (double p : pmf) {
        if (!(p >= 0.0))
            throw std::invalid_argument("joint pmf entries must be non-negative");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("joint pmf must sum to 1");
}

Graph::Graph(std::size_t node_count,
             std::vector<RateBps> rates,
             std::vector<LinkSpec> links,
             std::vector<JointReceptionModel> joints,
             std::int64_t packet_size_bits)
    : node_count_(node_count),
      rates_(std::move(rates)),
      joints_(std::move(joints)),
      packet_size_bits_(packet_size_bits) {
    if (node_count_ == 0)
        throw std::invalid_argument("graph needs at least one node");
    if (rates_.empty())
        throw std::invalid_argument("rate set must be non-empty");
    if (packet_size_bits_ <= 0)
        throw std::invalid_argument("packet size must be positive");
    std::sort(rates_.begin(), rates_.end());
    for (std::size_t k = 0; k < rates_.size(); ++k) {
        if (rates_[k] == 0)
            throw std::invalid_argument("rates must be positive");
        if (k > 0 && rates_[k] == rates_[k - 1])
            throw std::invalid_argument("rates must be distinct");
    }

    out_.assign(rates_.size(), std::vector<std::vector<LinkRef>>(node_count_));
    in_.assign(rates_.size(), std::vector<std::vector<LinkRef>>(node_count_));

    std::set<std::tuple<NodeId, NodeId, RateBps>> seen;
    for (const LinkSpec& link : links) {
        if (link.src >= node_count_ || link.dst >= node_count_)
            throw std::invalid_argument("link endpoint out of range");
        if (link.src == link.dst)
            throw std::invalid_argument("self links are not allowed");
        if (!(link.ratio >= 0.0 && link.ratio <= 1.0))
            throw std::invalid_argument("delivery ratio outside [0,1]");
        if (!seen.insert({link.src, link.dst, link.rate}).second)
            throw std::invalid_argument("duplicate link (src,dst,rate)");
        const std::size_t r = rate_index(link.rate);
        if (link.ratio == 0.0)
            continue;  // zero-ratio links are absent links
        out_[r][link.src].push_back({link.dst, link.ratio});
        in_[r][link.dst].push_back({link.src, link.ratio});
    }
    for (std::size_t r = 0; r < rates_.size(); ++r) {
        for (std::size_t v = 0; v < node_count_; ++v) {
            auto by_node = [](const LinkRef& a, const LinkRef& b) { return a.node < b.node; };
            std::sort(out_[r][v].begin(), out_[r][v].end(), by_node);
            std::sort(in_[r][v].begin(), in_[r][v].end(), by_node);
        }
    }

    joint_at_.assign(rates_.size(), std::vector<int>(node_count_, -1));
    std::sort(joints_.begin(), joints_.end(),
              [](const JointReceptionModel& a, const JointReceptionModel& b) {
                  return std::tie(a.node, a.rate) < std::tie(b.node, b.rate);
              });
    for (std::size_t k = 0; k < joints_.size(); ++k) {
        JointReceptionModel& model = joints_[k];
        model.validate();
        if (model.node >= node_count_)
            throw std::invalid_argument("joint model node out of range");
        const std::size_t r = rate_index(model.rate);
        if (joint_at_[r][model.node] >= 0)
            throw std::invalid_argument("multiple joint models for one (node, rate)");
        for (NodeId nbr : model.neighbors)
            if (link_ratio(model.node, nbr, r) == 0.0)
                throw std::invalid_argument(
                    "joint model neighbor is not an out-neighbor at that rate");
        joint_at_[r][model.node] = static_cast<int>(k);
    }
}

std::size_t Graph::rate_index(RateBps rate) const {
    auto it = std::lower_bound(rates_.begin(), rates_.end(), rate);
    if (it == rates_.end() || *it != rate)
        throw std::invalid_argument("rate " + std::to_string(rate) + " is not declared");
    return static_cast<std::size_t>(it - rates_.begin());
}

double Graph::link_ratio(NodeId i, NodeId j, std::size_t rate) const {
    const auto& links = out_[rate][i];
    auto it = find_link(links, j);
    return it == links.end() ? 0.0 : it->ratio;
}

std::vector<LinkSpec> Graph::links() const {
    std::vector<LinkSpec> all;
    for (std::size_t v = 0; v < node_count_; ++v)
        for (std::size_t r = 0; r < rates_.size(); ++r)
            for (const LinkRef& link : out_[r][v])
                all.push_back({static_cast<NodeId>(v), link.node, rates_[r], link.ratio});
    std::sort(all.begin(), all.end(), [](const LinkSpec& a, const LinkSpec& b) {
        return std::tie(a.src, a.dst, a.rate) < std::tie(b.src, b.dst, b.rate);
    });
    return all;
}

std::size_t Graph::link_count(std::size_t rate) const {
    std::size_t count = 0;
    for (std::size_t v = 0; v < node_count_; ++v)
        count += out_[rate][v].size();
    return count;
}

bool Graph::operator==(const Graph& other) const {
    if (node_count_ != other.node_count_ || rates_ != other.rates_ ||
        packet_size_bits_ != other.packet_size_bits_ || links() != other.links() ||
        joints_.size() != other.joints_.size())
        return false;
    for (std::size_t k = 0; k < joints_.size(); ++k) {
        const auto& a = joints_[k];
        const auto& b = other.joints_[k];
        if (a.node != b.node || a.rate != b.rate || a.neighbors != b.neighbors ||
            a.pmf != b.pmf)
            return false;
    }
    return true;
}

std::string format_double(double value) {
    if (std::isinf(value))
        return value > 0 ? "inf" : "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    (void)ec;
    return std::string(buf, ptr);
}

std::optional<RateBps> parse_rate_token(std::string_view token) {
    if (token.empty())
        return std::nullopt;
    // Exact integer fast path, then integral decimal/scientific forms.
    RateBps direct = 0;
    auto [iptr, iec] = std::from_chars(token.data(), token.data() + token.size(), direct);
    if (iec == std::errc{} && iptr == token.data() + token.size())
        return direct == 0 ? std::nullopt : std::optional<RateBps>(direct);
    const std::string text(token);
    char* end = nullptr;
    const double value = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size() || !(value > 0) || !std::isfinite(value))
        return std::nullopt;
    if (value != std::floor(value) || value > 9.0e18)
        return std::nullopt;
    return static_cast<RateBps>(value);
}

namespace {

struct LineScanner {
    std::string_view text;
    std::size_t pos = 0;
    int line_number = 0;

    // Next non-empty line with comments stripped; false at end of input.
    bool next(std::string& out) {
        while (pos < text.size()) {
            std::size_t eol = text.find('\n', pos);
            if (eol == std::string_view::npos)
                eol = text.size();
            std::string_view line = text.substr(pos, eol - pos);
            pos = eol + 1;
            ++line_number;
            if (auto hash = line.find('#'); hash != std::string_view::npos)
                line = line.substr(0, hash);
            std::size_t begin = line.find_first_not_of(" \t\r");
            if (begin == std::string_view::npos)
                continue;
            std::size_t last = line.find_last_not_of(" \t\r");
            out.assign(line.substr(begin, last - begin + 1));
            return true;
        }
        return false;
    }
};

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> tokens;
    std::istringstream in(line);
    std::string token;
    while (in >> token)
        tokens.push_back(token);
    return tokens;
}

double parse_ratio_token(const std::string& token, int line) {
    char* end = nullptr;
    const double value = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size() || !std::isfinite(value))
        throw ParseError(line, "bad probability '" + token + "'");
    return value;
}

std::uint64_t parse_uint_token(const std::string& token, int line, const char* what) {
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(token.c_str(), token.c_str() + token.size(), value);
    if (ec != std::errc{} || ptr != token.c_str() + token.size())
        throw ParseError(line, std::string("bad ") + what + " '" + token + "'");
    return value;
}

}  // namespace

Graph parse_graph(std::string_view text) {
    LineScanner scanner{text};
    std::string line;

    std::optional<std::size_t> node_count;
    std::vector<RateBps> rates;
    std::vector<LinkSpec> links;
    std::vector<JointReceptionModel> joints;
    std::set<RateBps> declared;

    while (scanner.next(line)) {
        const int at = scanner.line_number;
        const std::vector<std::string> tok = split_ws(line);
        const std::string& keyword = tok[0];

        if (keyword == "nodes") {
            if (node_count)
                throw ParseError(at, "duplicate 'nodes' line");
            if (tok.size() != 2)
                throw ParseError(at, "expected 'nodes <N>'");
            const std::uint64_t n = parse_uint_token(tok[1], at, "node count");
            if (n == 0)
                throw ParseError(at, "node count must be positive");
            node_count = static_cast<std::size_t>(n);
            continue;
        }
        if (!node_count)
            throw ParseError(at, "'nodes' must be the first declaration");

        if (keyword == "rates") {
            if (!rates.empty())
                throw ParseError(at, "duplicate 'rates' line");
            if (tok.size() < 2)
                throw ParseError(at, "expected 'rates <r1> ...'");
            for (std::size_t k = 1; k < tok.size(); ++k) {
                auto rate = parse_rate_token(tok[k]);
                if (!rate)
                    throw ParseError(at, "bad rate '" + tok[k] + "' (need integral bits/s)");
                if (!declared.insert(*rate).second)
                    throw ParseError(at, "duplicate rate " + std::to_string(*rate));
                rates.push_back(*rate);
            }
            continue;
        }
        if (rates.empty())
            throw ParseError(at, "'rates' must come before links");

        if (keyword == "link") {
            if (tok.size() != 5)
                throw ParseError(at, "expected 'link <src> <dst> <rate> <ratio>'");
            LinkSpec link;
            link.src = static_cast<NodeId>(parse_uint_token(tok[1], at, "node id"));
            link.dst = static_cast<NodeId>(parse_uint_token(tok[2], at, "node id"));
            auto rate = parse_rate_token(tok[3]);
            if (!rate)
                throw ParseError(at, "bad rate '" + tok[3] + "'");
            if (!declared.count(*rate))
                throw ParseError(at, "rate " + std::to_string(*rate) + " is not declared");
            link.rate = *rate;
            link.ratio = parse_ratio_token(tok[4], at);
            if (link.ratio < 0.0 || link.ratio > 1.0)
                throw ParseError(at, "delivery ratio outside [0,1]");
            if (link.src >= *node_count || link.dst >= *node_count)
                throw ParseError(at, "node id out of range");
            if (link.src == link.dst)
                throw ParseError(at, "self link");
            links.push_back(link);
            continue;
        }

        if (keyword == "joint") {
            if (tok.size() < 4)
                throw ParseError(at, "expected 'joint <node> <rate> <k> ...'");
            JointReceptionModel model;
            model.node = static_cast<NodeId>(parse_uint_token(tok[1], at, "node id"));
            auto rate = parse_rate_token(tok[2]);
            if (!rate)
                throw ParseError(at, "bad rate '" + tok[2] + "'");
            if (!declared.count(*rate))
                throw ParseError(at, "rate " + std::to_string(*rate) + " is not declared");
            model.rate = *rate;
            const std::uint64_t k = parse_uint_token(tok[3], at, "neighbor count");
            if (k == 0 || k > JointReceptionModel::kMaxNeighbors)
                throw ParseError(at, "joint neighbor count must be in [1," +
                                         std::to_string(JointReceptionModel::kMaxNeighbors) + "]");
            const std::size_t pmf_size = std::size_t{1} << k;
            if (tok.size() != 4 + k + pmf_size)
                throw ParseError(at, "joint line needs " + std::to_string(k) + " neighbors and " +
                                         std::to_string(pmf_size) + " probabilities");
            for (std::size_t q = 0; q < k; ++q)
                model.neighbors.push_back(
                    static_cast<NodeId>(parse_uint_token(tok[4 + q], at, "node id")));
            double sum = 0.0;
            for (std::size_t q = 0; q < pmf_size; ++q) {
                const double p = parse_ratio_token(tok[4 + k + q], at);
                if (p < 0.0)
                    throw ParseError(at, "joint pmf entries must be non-negative");
                model.pmf.push_back(p);
                sum += p;
            }
            if (std::abs(sum - 1.0) > kPmfParseTolerance)
                throw ParseError(at, "joint pmf sums to " + format_double(sum) + ", expected 1");
            // Renormalize drift beyond the model invariant; sums already
            // within float noise pass through untouched so canonical files
            // reparse bit-identically.
            if (std::abs(sum - 1.0) > 1e-9)
                for (double& p : model.pmf)
                    p /= sum;
            joints.push_back(std::move(model));
            continue;
        }

        throw ParseError(at, "unknown keyword '" + keyword + "'");
    }

    if (!node_count)
        throw ParseError(scanner.line_number, "missing 'nodes' line");
    if (rates.empty())
        throw ParseError(scanner.line_number, "missing 'rates' line");

    try {
        return Graph(*node_count, std::move(rates), std::move(links), std::move(joints));
    } catch (const std::invalid_argument& err) {
        throw ParseError(scanner.line_number, err.what());
    }
}

std::string serialize_graph(const Graph& g) {
    std::string out;
    out += "nodes " + std::to_string(g.node_count()) + "\n";
    out += "rates";
    for (RateBps rate : g.rates())
        out += " " + std::to_string(rate);
    out += "\n";
    for (const LinkSpec& link : g.links()) {
        out += "link " + std::to_string(link.src) + " " + std::to_string(link.dst) + " " +
               std::to_string(link.rate) + " " + format_double(link.ratio) + "\n";
    }
    for (const JointReceptionModel& model : g.joint_models()) {
        out += "joint " + std::to_string(model.node) + " " + std::to_string(model.rate) + " " +
               std::to_string(model.neighbors.size());
        for (NodeId nbr : model.neighbors)
            out += " " + std::to_string(nbr);
        for (double p : model.pmf)
            out += " " + format_double(p);
        out += "\n";
    }
    return out;
}

RatioLaw RatioLaw::parse(std::string_view spec) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (pos <= spec.size()) {
        std::size_t colon = spec.find(':', pos);
        if (colon == std::string_view::npos)
            colon = spec.size();
        parts.emplace_back(spec.substr(pos, colon - pos));
        pos = colon + 1;
    }
    auto number = [&](const std::string& token) {
        char* end = nullptr;
        const double v = std::strtod(token.c_str(), &end);
        if (end != token.c_str() + token.size() || !std::isfinite(v))
            throw std::invalid_argument("bad ratio-law number '" + token + "'");
        return v;
    };

    RatioLaw law;
    const std::string& name = parts[0];
    if (name == "constant") {
        if (parts.size() != 2)
            throw std::invalid_argument("expected constant:<value>");
        law.kind = Kind::Constant;
        law.lo = law.hi = number(parts[1]);
    } else if (name == "uniform") {
        if (parts.size() != 3)
            throw std::invalid_argument("expected uniform:<lo>:<hi>");
        law.kind = Kind::Uniform;
        law.lo = number(parts[1]);
        law.hi = number(parts[2]);
    } else if (name == "decaying" || name == "rate-decaying-uniform") {
        law.kind = Kind::DecayingUniform;
        if (parts.size() >= 3) {
            law.lo = number(parts[1]);
            law.hi = number(parts[2]);
        }
        if (parts.size() == 4)
            law.decay = number(parts[3]);
        else if (parts.size() != 1 && parts.size() != 3)
            throw std::invalid_argument("expected decaying[:<lo>:<hi>[:<factor>]]");
    } else {
        throw std::invalid_argument("unknown ratio law '" + name + "'");
    }
    if (!(law.lo > 0.0 && law.lo <= law.hi && law.hi <= 1.0))
        throw std::invalid_argument("ratio-law bounds must satisfy 0 < lo <= hi <= 1");
    if (law.kind == Kind::DecayingUniform && !(law.decay > 0.0 && law.decay <= 1.0))
        throw std::invalid_argument("decay factor must be in (0,1]");
    return law;
}

std::string RatioLaw::to_string() const {
    switch (kind) {
        case Kind::Constant:
            return "constant:" + format_double(lo);
        case Kind::Uniform:
            return "uniform:" + format_double(lo) + ":" + format_double(hi);
        case Kind::DecayingUniform:
            return "decaying:" + format_double(lo) + ":" + format_double(hi) + ":" +
                   format_double(decay);
    }
    return {};
}

double RatioLaw::sample(Rng& rng, std::size_t rate_idx) const {
    const double u = lo + (hi - lo) * rng.next_double();
    if (kind == Kind::DecayingUniform) {
        double scale = 1.0;
        for (std::size_t k = 0; k < rate_idx; ++k)
            scale *= decay;
        return u * scale;
    }
    return u;
}

Graph generate_random_graph(std::size_t node_count,
                            const std::vector<RateBps>& rates,
                            double density,
                            const RatioLaw& law,
                            std::uint64_t seed,
                            std::int64_t packet_size_bits) {
    if (node_count < 2)
        throw std::invalid_argument("generator needs at least 2 nodes");
    if (rates.empty())
        throw std::invalid_argument("generator needs a non-empty rate list");
    if (!(density > 0.0 && density <= 1.0))
        throw std::invalid_argument("density must be in (0,1]");

    std::vector<RateBps> sorted_rates = rates;
    std::sort(sorted_rates.begin(), sorted_rates.end());

    Rng rng(seed);
    std::vector<LinkSpec> links;
    // Fixed draw pattern (presence then ratio for every slot) keeps the
    // output a pure function of the seed.
    for (NodeId src = 0; src < node_count; ++src) {
        for (NodeId dst = 0; dst < node_count; ++dst) {
            if (src == dst)
                continue;
            for (std::size_t r = 0; r < sorted_rates.size(); ++r) {
                const bool present = rng.bernoulli(density);
                const double ratio = law.sample(rng, r);
                if (present && ratio > 0.0)
                    links.push_back({src, dst, sorted_rates[r], std::min(ratio, 1.0)});
            }
        }
    }
    return Graph(node_count, std::move(sorted_rates), std::move(links), {}, packet_size_bits);
}

}  // namespace anypath
