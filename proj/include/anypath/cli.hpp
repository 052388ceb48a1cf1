#pragma once

#include <optional>
#include <string>
#include <vector>

#include "anypath/graph.hpp"
#include "anypath/metrics.hpp"
#include "anypath/oracle.hpp"

namespace anypath {

/// Exit codes shared by every subcommand; stable for CI scripting.
enum ExitCode : int {
    kExitOk = 0,
    kExitMismatch = 1,  // validate found solver/oracle disagreement
    kExitUsage = 2,     // bad flags, bad input files, config errors
};

/// Parsed batch-run configuration. Exactly one graph source is set.
struct RunConfig {
    std::optional<std::string> graph_file;

    // Generator source.
    std::optional<std::size_t> gen_nodes;
    std::vector<RateBps> gen_rates;
    double gen_density = 0.3;
    std::string gen_ratio_law = "decaying";
    std::optional<std::uint64_t> gen_seed;

    std::string metric = "eatx";
    std::int64_t packet_bytes = 1500;
    std::string rate_mode = "multi";  // "multi" | "single:<bps>"

    std::optional<NodeId> dest;
    std::optional<NodeId> source;
    std::uint64_t trials = 100000;
    std::uint32_t cap = kDefaultRetransmissionCap;
    std::optional<std::uint64_t> seed;
    std::optional<RateBps> fixed_rate;  // eval: gains at this rate only

    std::string out_dir = "out";
    unsigned jobs = 1;
    bool force = false;
};

/// Entry point behind main(): args exclude the program name.
int run_cli(const std::vector<std::string>& args);

}  // namespace anypath
