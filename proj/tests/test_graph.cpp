#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include "anypath/graph.hpp"

using namespace anypath;

TEST_CASE("minimal two-node file parses to one perfect link") {
    const Graph g = parse_graph("nodes 2\nrates 1e6\nlink 0 1 1e6 1.0\n");
    CHECK(g.node_count() == 2);
    CHECK(g.rate_count() == 1);
    CHECK(g.rate_bps(0) == 1000000);
    CHECK(g.link_ratio(0, 1, 0) == 1.0);
    CHECK(g.link_ratio(1, 0, 0) == 0.0);
    CHECK(g.out_links(0, 0).size() == 1);
    CHECK(g.in_links(1, 0).size() == 1);
}

TEST_CASE("ratio outside [0,1] is rejected with the line number") {
    try {
        parse_graph("nodes 2\nrates 1e6\nlink 0 1 1e6 1.3\n");
        FAIL("expected ParseError");
    } catch (const ParseError& err) {
        CHECK(err.line == 3);
        CHECK(std::string(err.what()).find("ratio") != std::string::npos);
    }
}

TEST_CASE("parse errors carry context") {
    CHECK_THROWS_AS(parse_graph(""), ParseError);
    CHECK_THROWS_AS(parse_graph("rates 1e6\nnodes 2\n"), ParseError);
    CHECK_THROWS_AS(parse_graph("nodes 2\nrates 1e6\nlink 0 1 2e6 0.5\n"), ParseError);
    CHECK_THROWS_AS(parse_graph("nodes 2\nrates 1e6\nlink 0 0 1e6 0.5\n"), ParseError);
    CHECK_THROWS_AS(parse_graph("nodes 2\nrates 1e6\nlink 0 7 1e6 0.5\n"), ParseError);
    CHECK_THROWS_AS(parse_graph("nodes 2\nrates 1e6\nbogus 1 2 3\n"), ParseError);
    CHECK_THROWS_AS(
        parse_graph("nodes 2\nrates 1e6\nlink 0 1 1e6 0.5\nlink 0 1 1e6 0.6\n"),
        ParseError);
    // Non-integral rate token.
    CHECK_THROWS_AS(parse_graph("nodes 2\nrates 5.5\nlink 0 1 5.5 0.5\n"), ParseError);
}

TEST_CASE("joint pmf must sum to 1 within 1e-6") {
    const std::string good =
        "nodes 3\nrates 1e6\nlink 0 1 1e6 0.5\nlink 0 2 1e6 0.5\n"
        "joint 0 1e6 2 1 2 0.25 0.25 0.25 0.25\n";
    const Graph g = parse_graph(good);
    REQUIRE(g.joint_model(0, 0) != nullptr);
    CHECK(g.joint_model(0, 0)->neighbors == std::vector<NodeId>{1, 2});

    const std::string bad =
        "nodes 3\nrates 1e6\nlink 0 1 1e6 0.5\nlink 0 2 1e6 0.5\n"
        "joint 0 1e6 2 1 2 0.25 0.25 0.25 0.35\n";
    CHECK_THROWS_AS(parse_graph(bad), ParseError);

    // Slight drift is renormalized.
    const std::string drifting =
        "nodes 3\nrates 1e6\nlink 0 1 1e6 0.5\nlink 0 2 1e6 0.5\n"
        "joint 0 1e6 2 1 2 0.2500001 0.25 0.25 0.25\n";
    const Graph g2 = parse_graph(drifting);
    double sum = 0.0;
    for (double p : g2.joint_model(0, 0)->pmf)
        sum += p;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("joint model neighbors must be out-neighbors at that rate") {
    const std::string bad =
        "nodes 3\nrates 1e6\nlink 0 1 1e6 0.5\n"
        "joint 0 1e6 2 1 2 0.25 0.25 0.25 0.25\n";
    CHECK_THROWS_AS(parse_graph(bad), ParseError);
}

TEST_CASE("zero-ratio links load as absent") {
    const Graph g = parse_graph("nodes 3\nrates 1e6\nlink 0 1 1e6 0\nlink 0 2 1e6 0.4\n");
    CHECK(g.link_ratio(0, 1, 0) == 0.0);
    CHECK(g.out_links(0, 0).size() == 1);
    // Still a duplicate even though the first copy was dropped.
    CHECK_THROWS_AS(
        parse_graph("nodes 3\nrates 1e6\nlink 0 1 1e6 0\nlink 0 1 1e6 0.4\n"), ParseError);
}

TEST_CASE("serialize-parse round trip is the identity on canonical form") {
    const RatioLaw law = RatioLaw::parse("uniform:0.05:0.95");
    const Graph g = generate_random_graph(10, {1000000, 2000000}, 0.4, law, 99);
    const std::string canonical = serialize_graph(g);
    const Graph reparsed = parse_graph(canonical);
    CHECK(reparsed == g);
    CHECK(serialize_graph(reparsed) == canonical);

    // A scrambled but equivalent file canonicalizes to the same form.
    const std::string messy =
        "# comment\nnodes 2\n\nrates 2000000 1000000\nlink 1 0 2000000 0.25   # tail\n"
        "link 0 1 1000000 0.5\n";
    const Graph m = parse_graph(messy);
    CHECK(serialize_graph(parse_graph(serialize_graph(m))) == serialize_graph(m));
}

TEST_CASE("round trip is a fixed point for joint models too") {
    const std::string file =
        "nodes 4\nrates 1e6\nlink 0 1 1e6 0.5\nlink 0 2 1e6 0.4\nlink 0 3 1e6 0.3\n"
        "joint 0 1e6 3 1 2 3 0.1 0.2 0.1 0.1 0.15 0.05 0.1 0.2\n";
    const Graph g = parse_graph(file);
    const std::string canon = serialize_graph(g);
    const Graph g2 = parse_graph(canon);
    CHECK(g2 == g);
    CHECK(serialize_graph(g2) == canon);

    // Random pmfs sum to 1 only up to float noise; canonicalization must not
    // drift by an ulp per parse/serialize pass.
    Rng rng(5150);
    for (int iter = 0; iter < 200; ++iter) {
        const std::size_t k = 1 + rng.next_below(4);
        std::vector<LinkSpec> links;
        JointReceptionModel model;
        model.node = 0;
        model.rate = 1000000;
        for (std::size_t q = 0; q < k; ++q) {
            links.push_back({0, static_cast<NodeId>(q + 1), 1000000, 0.5});
            model.neighbors.push_back(static_cast<NodeId>(q + 1));
        }
        model.pmf.resize(std::size_t{1} << k);
        double sum = 0.0;
        for (double& p : model.pmf)
            sum += (p = rng.next_double());
        for (double& p : model.pmf)
            p /= sum;
        const Graph made(k + 1, {1000000}, std::move(links), {model});
        const std::string text = serialize_graph(made);
        const Graph back = parse_graph(text);
        REQUIRE(back == made);
        REQUIRE(serialize_graph(back) == text);
    }
}

TEST_CASE("in-edge and out-edge views agree on the link multiset") {
    const Graph g = generate_random_graph(12, {1000000, 2000000}, 0.3,
                                          RatioLaw::parse("uniform:0.1:0.9"), 5);
    std::multiset<std::tuple<NodeId, NodeId, std::size_t, double>> from_out, from_in;
    for (std::size_t r = 0; r < g.rate_count(); ++r) {
        for (NodeId v = 0; v < g.node_count(); ++v) {
            for (const LinkRef& e : g.out_links(v, r))
                from_out.insert({v, e.node, r, e.ratio});
            for (const LinkRef& e : g.in_links(v, r))
                from_in.insert({e.node, v, r, e.ratio});
        }
    }
    CHECK(from_out == from_in);
}

TEST_CASE("generator: perfect pair") {
    const Graph g = generate_random_graph(2, {1000000}, 1.0, RatioLaw::parse("constant:1.0"), 1);
    CHECK(g.link_ratio(0, 1, 0) == 1.0);
    CHECK(g.link_ratio(1, 0, 0) == 1.0);
}

TEST_CASE("generator: same seed, same graph; different seed, different graph") {
    const RatioLaw law = RatioLaw::parse("decaying");
    const Graph a = generate_random_graph(9, {1000000, 5500000}, 0.5, law, 42);
    const Graph b = generate_random_graph(9, {1000000, 5500000}, 0.5, law, 42);
    const Graph c = generate_random_graph(9, {1000000, 5500000}, 0.5, law, 43);
    CHECK(a == b);
    CHECK_FALSE(a == c);
}

TEST_CASE("generator: rate-decaying law thins higher rates") {
    const Graph g = generate_random_graph(8, {1000000, 2000000}, 0.8,
                                          RatioLaw::parse("rate-decaying-uniform"), 7);
    double mean[2] = {0.0, 0.0};
    std::size_t count[2] = {0, 0};
    for (std::size_t r = 0; r < 2; ++r) {
        for (NodeId v = 0; v < g.node_count(); ++v) {
            for (const LinkRef& e : g.out_links(v, r)) {
                mean[r] += e.ratio;
                ++count[r];
            }
        }
    }
    REQUIRE(count[0] > 0);
    REQUIRE(count[1] > 0);
    CHECK(mean[1] / count[1] < mean[0] / count[0]);
}

TEST_CASE("generator rejects bad arguments") {
    const RatioLaw law = RatioLaw::parse("constant:0.5");
    CHECK_THROWS_AS(generate_random_graph(1, {1000000}, 0.5, law, 1), std::invalid_argument);
    CHECK_THROWS_AS(generate_random_graph(4, {}, 0.5, law, 1), std::invalid_argument);
    CHECK_THROWS_AS(generate_random_graph(4, {1000000}, 0.0, law, 1), std::invalid_argument);
    CHECK_THROWS_AS(RatioLaw::parse("constant:0"), std::invalid_argument);
    CHECK_THROWS_AS(RatioLaw::parse("uniform:0.9:0.1"), std::invalid_argument);
    CHECK_THROWS_AS(RatioLaw::parse("nope"), std::invalid_argument);
}

TEST_CASE("rate tokens accept integral scientific forms only") {
    CHECK(parse_rate_token("1000000") == RateBps{1000000});
    CHECK(parse_rate_token("1e6") == RateBps{1000000});
    CHECK(parse_rate_token("5.5e6") == RateBps{5500000});
    CHECK(parse_rate_token("11e6") == RateBps{11000000});
    CHECK_FALSE(parse_rate_token("5.5").has_value());
    CHECK_FALSE(parse_rate_token("0").has_value());
    CHECK_FALSE(parse_rate_token("-1e6").has_value());
    CHECK_FALSE(parse_rate_token("junk").has_value());
}
