#ifndef QFL_TOPOLOGY_HPP
#define QFL_TOPOLOGY_HPP

#include <cstdint>
#include <map>
#include <vector>

#include "qfl/fed.hpp"

namespace qfl::topology {

enum class TopologyKind { Centralized, Hierarchical, Chained };

struct TopologyConfig {
    TopologyKind kind = TopologyKind::Centralized;
    int rounds = 1; // passes, for the chained topology

    // hierarchical: client id -> edge server id; every client in exactly one
    // cluster.
    std::map<int, int> cluster_of;

    // chained: a permutation of all client ids.
    std::vector<int> chain_order;

    void validate(const std::vector<fed::Client>& clients) const;
};

struct RunResult {
    fed::GlobalModel global;
    std::vector<fed::RoundRecord> history;
};

// Hub-and-spoke: repeats fed::run_round for the configured number of rounds.
RunResult run_centralized(std::vector<fed::Client>& clients, const fed::GlobalModel& initial,
                          const TopologyConfig& config, const fed::AggregationStrategy& strategy,
                          int local_epochs, std::uint64_t seed, const fed::Evaluator& evaluate);

// Two-tier rounds: edge servers aggregate their clusters with sample-weighted
// FedAvg, the cloud aggregates the intermediate models weighted by cluster
// sample totals. Equals flat FedAvg by weighted-mean associativity.
RunResult run_hierarchical(std::vector<fed::Client>& clients, const fed::GlobalModel& initial,
                           const TopologyConfig& config, const fed::AggregationStrategy& strategy,
                           int local_epochs, std::uint64_t seed, const fed::Evaluator& evaluate);

// Serverless chain: the model is trained by chain_order[0], handed to
// chain_order[1], and so on; one full traversal per pass, no aggregation
// ever.
RunResult run_chained(std::vector<fed::Client>& clients, const fed::GlobalModel& initial,
                      const TopologyConfig& config, int local_epochs, std::uint64_t seed,
                      const fed::Evaluator& evaluate);

} // namespace qfl::topology

#endif
