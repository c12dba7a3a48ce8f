#ifndef QFL_FED_HPP
#define QFL_FED_HPP

#include <cstdint>
#include <functional>
#include <variant>
#include <vector>

#include "qfl/metrics.hpp"
#include "qfl/vqc.hpp"

namespace qfl::fed {

using vqc::ParamVector;

// Sparse overlay: sorted distinct indices into the global vector plus their
// values.
struct SparsePayload {
    std::vector<std::size_t> indices;
    std::vector<double> values;
};

struct ModelUpdate {
    int client_id = 0;
    std::variant<ParamVector, SparsePayload> payload;
    std::size_t n_samples = 0;
    double reported_accuracy = 0.0;

    bool is_sparse() const { return std::holds_alternative<SparsePayload>(payload); }
    const ParamVector& dense() const;
    const SparsePayload& sparse() const;
    std::size_t transmitted_values() const;

    void validate(std::size_t model_len) const;
};

struct GlobalModel {
    ParamVector params;
    int version = 0;
};

enum class AggregationKind { FedAvg, AccuracyWeighted, SampledMerge };

struct AggregationStrategy {
    AggregationKind kind = AggregationKind::FedAvg;
    double sample_fraction_up = 0.5;   // rho up, fraction of weights a client shares
    double sample_fraction_down = 0.5; // rho down, fraction sent back after merging

    void validate() const;
};

// Sample-count-weighted elementwise mean of dense updates; equal counts
// reduce to the arithmetic mean.
ParamVector fedavg(const std::vector<ModelUpdate>& updates);

// Weights proportional to reported accuracy. Throws AllAccuraciesZeroError
// when every accuracy is zero so the caller can fall back to fedavg.
ParamVector accuracy_weighted_aggregate(const std::vector<ModelUpdate>& updates);

// ceil(fraction * len) distinct indices drawn uniformly without replacement
// (seeded); the caller fills in client id, sample count and accuracy.
ModelUpdate sample_update(const ParamVector& params, double fraction_up, std::uint64_t seed);

struct MergeResult {
    GlobalModel global;
    SparsePayload downlink; // identical for every client
};

// For each index reported by at least one client the new value is the mean
// over reporting clients; unreported indices retain the previous global
// value. The downlink is a seeded uniform sample of ceil(fraction * len)
// indices of the merged vector.
MergeResult merge_sparse(const GlobalModel& global, const std::vector<ModelUpdate>& updates,
                         double fraction_down, std::uint64_t seed);

// Overlay a sparse payload onto a parameter vector in place.
void apply_sparse(ParamVector& params, const SparsePayload& payload);

// -- round machinery ---------------------------------------------------------

struct ClientRoundStats {
    int client_id = 0;
    double train_loss = 0.0;
    double train_accuracy = 0.0;
    std::size_t n_samples = 0;
};

struct RoundRecord {
    int round = 0;
    std::vector<ClientRoundStats> clients; // nonempty for a completed round
    Metrics global;
    double comm_seconds = 0.0;
    std::uint64_t bytes_exchanged = 0; // 8 bytes per parameter value crossing the client edge
};

struct LocalTrainOutcome {
    ParamVector params;
    double loss = 0.0;
    double accuracy = 0.0;
};

// Runs local training for one client: start parameters, epoch count, and the
// seed derived for (round, client).
using LocalTrainFn =
    std::function<LocalTrainOutcome(const ParamVector& start, int epochs, std::uint64_t seed)>;

struct Client {
    int id = 0;
    std::size_t n_samples = 0;
    LocalTrainFn train;
    // Persists across rounds; under sampled-merge only downlinked indices
    // are overwritten between rounds.
    ParamVector local_params;
};

using Evaluator = std::function<Metrics(const ParamVector&)>;

struct RoundResult {
    GlobalModel global;
    RoundRecord record;
};

// One federated round: broadcast per strategy, local training, upload per
// strategy, aggregation, version increment. The round index is the incoming
// global version; all per-client seeds derive from (seed, round, client id).
RoundResult run_round(std::vector<Client>& clients, const GlobalModel& global,
                      const AggregationStrategy& strategy, int local_epochs,
                      std::uint64_t seed, const Evaluator& evaluate);

} // namespace qfl::fed

#endif
