#include "qfl/topology.hpp"

#include <algorithm>
#include <set>

#include "qfl/rng.hpp"

namespace qfl::topology {

void TopologyConfig::validate(const std::vector<fed::Client>& clients) const {
    if (rounds < 0) throw ValidationError("topology: rounds must be >= 0");
    if (clients.empty()) throw ValidationError("topology: at least one client required");
    if (kind == TopologyKind::Hierarchical) {
        if (cluster_of.empty()) throw ValidationError("hierarchical: cluster assignment is empty");
        for (const auto& client : clients)
            if (!cluster_of.count(client.id))
                throw ValidationError("hierarchical: client " + std::to_string(client.id) +
                                      " has no cluster");
        for (const auto& entry : cluster_of) {
            const int client_id = entry.first;
            const bool known = std::any_of(clients.begin(), clients.end(),
                                           [&](const fed::Client& c) { return c.id == client_id; });
            if (!known)
                throw ValidationError("hierarchical: cluster map names unknown client " +
                                      std::to_string(client_id));
        }
    }
    if (kind == TopologyKind::Chained) {
        if (chain_order.empty()) throw ValidationError("chained: order is empty");
        std::set<int> seen;
        for (int id : chain_order) {
            if (!seen.insert(id).second)
                throw ValidationError("chained: duplicate client " + std::to_string(id) +
                                      " in order");
            const bool known = std::any_of(clients.begin(), clients.end(),
                                           [&](const fed::Client& c) { return c.id == id; });
            if (!known)
                throw ValidationError("chained: order names unknown client " + std::to_string(id));
        }
        if (seen.size() != clients.size())
            throw ValidationError("chained: order must be a permutation of all client ids");
    }
}

namespace {

void reset_locals(std::vector<fed::Client>& clients, const fed::ParamVector& params) {
    for (auto& client : clients) client.local_params = params;
}

} // namespace

RunResult run_centralized(std::vector<fed::Client>& clients, const fed::GlobalModel& initial,
                          const TopologyConfig& config, const fed::AggregationStrategy& strategy,
                          int local_epochs, std::uint64_t seed, const fed::Evaluator& evaluate) {
    config.validate(clients);
    strategy.validate();
    reset_locals(clients, initial.params);
    RunResult result{initial, {}};
    for (int r = 0; r < config.rounds; ++r) {
        fed::RoundResult round =
            fed::run_round(clients, result.global, strategy, local_epochs, seed, evaluate);
        result.global = std::move(round.global);
        result.history.push_back(std::move(round.record));
    }
    return result;
}

RunResult run_hierarchical(std::vector<fed::Client>& clients, const fed::GlobalModel& initial,
                           const TopologyConfig& config, const fed::AggregationStrategy& strategy,
                           int local_epochs, std::uint64_t seed, const fed::Evaluator& evaluate) {
    config.validate(clients);
    if (strategy.kind != fed::AggregationKind::FedAvg)
        throw ValidationError("hierarchical topology aggregates with fedavg at both tiers");
    reset_locals(clients, initial.params);

    RunResult result{initial, {}};
    const std::size_t len = initial.params.size();
    for (int r = 0; r < config.rounds; ++r) {
        const int round = result.global.version;
        fed::RoundRecord record;
        record.round = round;
        std::uint64_t values_exchanged = 0;

        // Broadcast down both tiers; only the client edge is metered.
        for (auto& client : clients) {
            client.local_params = result.global.params;
            values_exchanged += len;
        }

        // Local training, identical seed derivation to the flat round.
        std::map<int, std::vector<fed::ModelUpdate>> per_cluster;
        for (auto& client : clients) {
            const std::uint64_t train_seed =
                derive_seed(seed, SeedDomain::ClientTrain, static_cast<std::uint64_t>(round),
                            static_cast<std::uint64_t>(client.id));
            const fed::LocalTrainOutcome outcome =
                client.train(client.local_params, local_epochs, train_seed);
            client.local_params = outcome.params;
            record.clients.push_back({client.id, outcome.loss, outcome.accuracy, client.n_samples});

            fed::ModelUpdate update;
            update.client_id = client.id;
            update.payload = outcome.params;
            update.n_samples = client.n_samples;
            update.reported_accuracy = outcome.accuracy;
            values_exchanged += len;
            per_cluster[config.cluster_of.at(client.id)].push_back(std::move(update));
        }

        // Intra-cluster aggregation at the edge servers, then the cloud
        // aggregates intermediates weighted by cluster sample totals.
        std::vector<fed::ModelUpdate> intermediates;
        for (auto& [edge_id, updates] : per_cluster) {
            fed::ModelUpdate intermediate;
            intermediate.client_id = edge_id;
            intermediate.payload = fed::fedavg(updates);
            std::size_t total = 0;
            for (const auto& u : updates) total += u.n_samples;
            intermediate.n_samples = total;
            intermediates.push_back(std::move(intermediate));
        }
        result.global.params = fed::fedavg(intermediates);
        result.global.version += 1;

        record.global = evaluate(result.global.params);
        record.bytes_exchanged = values_exchanged * 8;
        result.history.push_back(std::move(record));
    }
    return result;
}

RunResult run_chained(std::vector<fed::Client>& clients, const fed::GlobalModel& initial,
                      const TopologyConfig& config, int local_epochs, std::uint64_t seed,
                      const fed::Evaluator& evaluate) {
    config.validate(clients);
    reset_locals(clients, initial.params);

    RunResult result{initial, {}};
    const std::size_t len = initial.params.size();
    for (int pass = 0; pass < config.rounds; ++pass) {
        fed::RoundRecord record;
        record.round = pass;
        std::uint64_t values_exchanged = 0;
        for (int id : config.chain_order) {
            auto it = std::find_if(clients.begin(), clients.end(),
                                   [&](const fed::Client& c) { return c.id == id; });
            const std::uint64_t train_seed =
                derive_seed(seed, SeedDomain::ClientTrain, static_cast<std::uint64_t>(pass),
                            static_cast<std::uint64_t>(id));
            const fed::LocalTrainOutcome outcome =
                it->train(result.global.params, local_epochs, train_seed);
            it->local_params = outcome.params;
            result.global.params = outcome.params;
            record.clients.push_back({id, outcome.loss, outcome.accuracy, it->n_samples});
            values_exchanged += 2 * len; // model received and handed on
        }
        // No aggregation happens in a chain, so the version stays put.
        record.global = evaluate(result.global.params);
        record.bytes_exchanged = values_exchanged * 8;
        result.history.push_back(std::move(record));
    }
    return result;
}

} // namespace qfl::topology
