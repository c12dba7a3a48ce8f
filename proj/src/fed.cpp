#include "qfl/fed.hpp"

#include <cmath>

#include "qfl/rng.hpp"

namespace qfl::fed {

const ParamVector& ModelUpdate::dense() const {
    if (is_sparse()) throw StructuralError("update is sparse, dense payload requested");
    return std::get<ParamVector>(payload);
}

const SparsePayload& ModelUpdate::sparse() const {
    if (!is_sparse()) throw StructuralError("update is dense, sparse payload requested");
    return std::get<SparsePayload>(payload);
}

std::size_t ModelUpdate::transmitted_values() const {
    return is_sparse() ? sparse().values.size() : dense().size();
}

void ModelUpdate::validate(std::size_t model_len) const {
    if (reported_accuracy < 0.0 || reported_accuracy > 1.0)
        throw ValidationError("reported_accuracy must lie in [0, 1]");
    if (is_sparse()) {
        const auto& s = sparse();
        if (s.indices.size() != s.values.size())
            throw StructuralError("sparse payload index/value lengths differ");
        for (std::size_t i = 0; i < s.indices.size(); ++i) {
            if (s.indices[i] >= model_len)
                throw StructuralError("sparse index out of parameter bounds");
            if (i > 0 && s.indices[i] <= s.indices[i - 1])
                throw StructuralError("sparse indices must be strictly increasing");
        }
    } else if (dense().size() != model_len) {
        throw StructuralError("dense payload length does not match global model");
    }
}

void AggregationStrategy::validate() const {
    if (!(sample_fraction_up > 0.0) || sample_fraction_up > 1.0)
        throw ValidationError("sample_fraction_up must lie in (0, 1]");
    if (!(sample_fraction_down > 0.0) || sample_fraction_down > 1.0)
        throw ValidationError("sample_fraction_down must lie in (0, 1]");
}

namespace {

// Shared weighted-mean core. Weights are normalized up front and applied in
// client order, so degenerate cases (equal counts vs. plain mean) are
// bitwise identical across aggregators.
ParamVector weighted_mean(const std::vector<ModelUpdate>& updates,
                          const std::vector<double>& weights) {
    const std::size_t len = updates.front().dense().size();
    ParamVector out(len, 0.0);
    for (std::size_t k = 0; k < updates.size(); ++k) {
        const auto& v = updates[k].dense();
        for (std::size_t i = 0; i < len; ++i) out[i] += weights[k] * v[i];
    }
    return out;
}

void check_dense_updates(const std::vector<ModelUpdate>& updates) {
    if (updates.empty()) throw ValidationError("aggregation requires at least one update");
    const std::size_t len = updates.front().dense().size();
    for (const auto& u : updates) u.validate(len);
}

} // namespace

ParamVector fedavg(const std::vector<ModelUpdate>& updates) {
    check_dense_updates(updates);
    double total = 0.0;
    for (const auto& u : updates) total += static_cast<double>(u.n_samples);
    std::vector<double> weights(updates.size());
    if (total == 0.0) {
        const double uniform = 1.0 / static_cast<double>(updates.size());
        for (auto& w : weights) w = uniform;
    } else {
        for (std::size_t k = 0; k < updates.size(); ++k)
            weights[k] = static_cast<double>(updates[k].n_samples) / total;
    }
    return weighted_mean(updates, weights);
}

ParamVector accuracy_weighted_aggregate(const std::vector<ModelUpdate>& updates) {
    check_dense_updates(updates);
    double total = 0.0;
    for (const auto& u : updates) total += u.reported_accuracy;
    if (total == 0.0) throw AllAccuraciesZeroError();
    std::vector<double> weights(updates.size());
    for (std::size_t k = 0; k < updates.size(); ++k)
        weights[k] = updates[k].reported_accuracy / total;
    return weighted_mean(updates, weights);
}

ModelUpdate sample_update(const ParamVector& params, double fraction_up, std::uint64_t seed) {
    if (!(fraction_up > 0.0) || fraction_up > 1.0)
        throw ValidationError("sample_update: fraction must lie in (0, 1]");
    if (params.empty()) throw ValidationError("sample_update: empty parameter vector");
    const std::size_t count = static_cast<std::size_t>(
        std::ceil(fraction_up * static_cast<double>(params.size())));
    Rng rng(seed);
    SparsePayload payload;
    payload.indices = rng.sample_without_replacement(params.size(), count);
    payload.values.reserve(count);
    for (std::size_t idx : payload.indices) payload.values.push_back(params[idx]);
    ModelUpdate update;
    update.payload = std::move(payload);
    return update;
}

MergeResult merge_sparse(const GlobalModel& global, const std::vector<ModelUpdate>& updates,
                         double fraction_down, std::uint64_t seed) {
    if (updates.empty()) throw ValidationError("merge_sparse: no updates");
    if (!(fraction_down > 0.0) || fraction_down > 1.0)
        throw ValidationError("merge_sparse: fraction must lie in (0, 1]");
    const std::size_t len = global.params.size();
    for (const auto& u : updates) {
        if (!u.is_sparse()) throw StructuralError("merge_sparse expects sparse updates");
        u.validate(len);
    }

    // Count reporters per index, then average contributions in client order.
    std::vector<std::size_t> reporters(len, 0);
    for (const auto& u : updates)
        for (std::size_t idx : u.sparse().indices) ++reporters[idx];

    ParamVector merged = global.params; // unreported indices keep their value
    for (std::size_t i = 0; i < len; ++i)
        if (reporters[i] > 0) merged[i] = 0.0;
    for (const auto& u : updates) {
        const auto& s = u.sparse();
        for (std::size_t k = 0; k < s.indices.size(); ++k) {
            const std::size_t idx = s.indices[k];
            merged[idx] += (1.0 / static_cast<double>(reporters[idx])) * s.values[k];
        }
    }

    const std::size_t down_count = static_cast<std::size_t>(
        std::ceil(fraction_down * static_cast<double>(len)));
    Rng rng(seed);
    SparsePayload downlink;
    downlink.indices = rng.sample_without_replacement(len, down_count);
    downlink.values.reserve(down_count);
    for (std::size_t idx : downlink.indices) downlink.values.push_back(merged[idx]);

    MergeResult result;
    result.global = GlobalModel{std::move(merged), global.version + 1};
    result.downlink = std::move(downlink);
    return result;
}

void apply_sparse(ParamVector& params, const SparsePayload& payload) {
    for (std::size_t k = 0; k < payload.indices.size(); ++k) {
        if (payload.indices[k] >= params.size())
            throw StructuralError("apply_sparse: index out of bounds");
        params[payload.indices[k]] = payload.values[k];
    }
}

RoundResult run_round(std::vector<Client>& clients, const GlobalModel& global,
                      const AggregationStrategy& strategy, int local_epochs,
                      std::uint64_t seed, const Evaluator& evaluate) {
    if (clients.empty()) throw ValidationError("run_round: at least one client required");
    if (local_epochs < 0) throw ValidationError("run_round: local_epochs must be >= 0");
    strategy.validate();

    const int round = global.version;
    const std::size_t len = global.params.size();
    RoundRecord record;
    record.round = round;
    std::uint64_t values_exchanged = 0;

    // Broadcast. Dense strategies push the full global model; sampled-merge
    // clients continue from their local copy, refreshed by the previous
    // round's downlink overlay.
    if (strategy.kind != AggregationKind::SampledMerge) {
        for (auto& client : clients) {
            client.local_params = global.params;
            values_exchanged += len;
        }
    }

    // Local training.
    std::vector<ModelUpdate> updates;
    updates.reserve(clients.size());
    for (auto& client : clients) {
        const std::uint64_t train_seed =
            derive_seed(seed, SeedDomain::ClientTrain, static_cast<std::uint64_t>(round),
                        static_cast<std::uint64_t>(client.id));
        const LocalTrainOutcome outcome = client.train(client.local_params, local_epochs, train_seed);
        if (outcome.params.size() != len)
            throw StructuralError("client returned parameters of the wrong length");
        client.local_params = outcome.params;
        record.clients.push_back(
            {client.id, outcome.loss, outcome.accuracy, client.n_samples});

        ModelUpdate update;
        if (strategy.kind == AggregationKind::SampledMerge) {
            const std::uint64_t mask_seed =
                derive_seed(seed, SeedDomain::UploadMask, static_cast<std::uint64_t>(round),
                            static_cast<std::uint64_t>(client.id));
            update = sample_update(outcome.params, strategy.sample_fraction_up, mask_seed);
        } else {
            update.payload = outcome.params;
        }
        update.client_id = client.id;
        update.n_samples = client.n_samples;
        update.reported_accuracy = outcome.accuracy;
        values_exchanged += update.transmitted_values();
        updates.push_back(std::move(update));
    }

    // Aggregate.
    GlobalModel next;
    next.version = global.version + 1;
    switch (strategy.kind) {
        case AggregationKind::FedAvg:
            next.params = fedavg(updates);
            break;
        case AggregationKind::AccuracyWeighted:
            try {
                next.params = accuracy_weighted_aggregate(updates);
            } catch (const AllAccuraciesZeroError&) {
                next.params = fedavg(updates);
            }
            break;
        case AggregationKind::SampledMerge: {
            const std::uint64_t down_seed =
                derive_seed(seed, SeedDomain::DownlinkMask, static_cast<std::uint64_t>(round));
            MergeResult merged =
                merge_sparse(global, updates, strategy.sample_fraction_down, down_seed);
            next.params = std::move(merged.global.params);
            for (auto& client : clients) {
                apply_sparse(client.local_params, merged.downlink);
                values_exchanged += merged.downlink.values.size();
            }
            break;
        }
    }

    record.global = evaluate(next.params);
    record.bytes_exchanged = values_exchanged * 8;
    return RoundResult{std::move(next), std::move(record)};
}

} // namespace qfl::fed
