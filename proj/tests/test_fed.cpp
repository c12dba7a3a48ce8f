#include <doctest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "qfl/fed.hpp"
#include "qfl/rng.hpp"

using namespace qfl;
using namespace qfl::fed;

namespace {

ModelUpdate dense_update(int id, ParamVector params, std::size_t n_samples, double accuracy) {
    ModelUpdate u;
    u.client_id = id;
    u.payload = std::move(params);
    u.n_samples = n_samples;
    u.reported_accuracy = accuracy;
    return u;
}

// A stub trainer that adds a client-specific constant to every parameter.
Client shift_client(int id, std::size_t n_samples, double delta) {
    Client c;
    c.id = id;
    c.n_samples = n_samples;
    c.train = [delta](const ParamVector& start, int epochs, std::uint64_t) {
        LocalTrainOutcome out;
        out.params = start;
        for (auto& v : out.params) v += delta * epochs;
        out.loss = std::abs(delta);
        out.accuracy = 0.5;
        return out;
    };
    return c;
}

Metrics null_metrics(const ParamVector&) { return Metrics{}; }

} // namespace

TEST_CASE("fedavg basics") {
    SUBCASE("two identical updates reproduce the vector") {
        const auto out = fedavg({dense_update(0, {1.5, -2.0}, 10, 0.5),
                                 dense_update(1, {1.5, -2.0}, 10, 0.5)});
        CHECK(out == ParamVector{1.5, -2.0});
    }
    SUBCASE("equal counts reduce to the arithmetic mean") {
        const auto out = fedavg({dense_update(0, {1.0, 3.0}, 7, 0.5),
                                 dense_update(1, {3.0, 5.0}, 7, 0.5)});
        CHECK(out[0] == doctest::Approx(2.0).epsilon(1e-15));
        CHECK(out[1] == doctest::Approx(4.0).epsilon(1e-15));
    }
    SUBCASE("sample counts weight the mean") {
        const auto out = fedavg({dense_update(0, {0.0}, 1, 0.5), dense_update(1, {4.0}, 3, 0.5)});
        CHECK(out[0] == doctest::Approx(3.0).epsilon(1e-15));
    }
    SUBCASE("empty list is rejected") { CHECK_THROWS_AS(fedavg({}), ValidationError); }
    SUBCASE("length mismatch is structural") {
        CHECK_THROWS_AS(fedavg({dense_update(0, {1.0}, 1, 0.5),
                                dense_update(1, {1.0, 2.0}, 1, 0.5)}),
                        StructuralError);
    }
}

TEST_CASE("fedavg matches the brute-force oracle on random instances") {
    Rng rng(101);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t clients = 1 + rng.uniform_int(5);
        const std::size_t len = 1 + rng.uniform_int(8);
        std::vector<ModelUpdate> updates;
        for (std::size_t k = 0; k < clients; ++k) {
            ParamVector params(len);
            for (auto& v : params) v = rng.uniform(-5.0, 5.0);
            updates.push_back(dense_update(static_cast<int>(k), params,
                                           1 + rng.uniform_int(50), rng.uniform01()));
        }
        const auto got = fedavg(updates);
        const auto want = oracles::brute_force_fedavg(updates);
        for (std::size_t i = 0; i < len; ++i) CHECK(std::abs(got[i] - want[i]) < 1e-12);
    }
}

TEST_CASE("fedavg linearity: shifting every update shifts the mean") {
    Rng rng(103);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t len = 4;
        std::vector<ModelUpdate> updates, shifted;
        const double c = rng.uniform(-2.0, 2.0);
        for (int k = 0; k < 3; ++k) {
            ParamVector params(len);
            for (auto& v : params) v = rng.uniform(-1.0, 1.0);
            ParamVector plus = params;
            for (auto& v : plus) v += c;
            updates.push_back(dense_update(k, params, 1 + rng.uniform_int(9), 0.5));
            shifted.push_back(dense_update(k, plus, updates.back().n_samples, 0.5));
        }
        const auto base = fedavg(updates);
        const auto moved = fedavg(shifted);
        for (std::size_t i = 0; i < len; ++i)
            CHECK(moved[i] == doctest::Approx(base[i] + c).epsilon(1e-12));
    }
}

TEST_CASE("accuracy weighting") {
    SUBCASE("equal accuracies equal fedavg with equal counts") {
        const std::vector<ModelUpdate> updates{dense_update(0, {1.0, 2.0}, 5, 0.7),
                                               dense_update(1, {3.0, 6.0}, 5, 0.7)};
        CHECK(accuracy_weighted_aggregate(updates) == fedavg(updates));
    }
    SUBCASE("weights are proportional to accuracy") {
        const auto out = accuracy_weighted_aggregate(
            {dense_update(0, {0.0}, 1, 0.25), dense_update(1, {4.0}, 1, 0.75)});
        CHECK(out[0] == doctest::Approx(3.0).epsilon(1e-15));
    }
    SUBCASE("zero-accuracy clients contribute nothing") {
        const auto out = accuracy_weighted_aggregate(
            {dense_update(0, {100.0}, 1, 0.0), dense_update(1, {2.0}, 1, 0.9)});
        CHECK(out[0] == doctest::Approx(2.0).epsilon(1e-15));
    }
    SUBCASE("all-zero accuracies signal the fedavg fallback") {
        CHECK_THROWS_AS(accuracy_weighted_aggregate(
                            {dense_update(0, {1.0}, 1, 0.0), dense_update(1, {2.0}, 1, 0.0)}),
                        AllAccuraciesZeroError);
    }
}

TEST_CASE("accuracy weights normalize to one and match the oracle") {
    Rng rng(107);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t clients = 1 + rng.uniform_int(5);
        const std::size_t len = 1 + rng.uniform_int(8);
        std::vector<ModelUpdate> updates;
        double total = 0.0;
        for (std::size_t k = 0; k < clients; ++k) {
            ParamVector params(len);
            for (auto& v : params) v = rng.uniform(-5.0, 5.0);
            updates.push_back(dense_update(static_cast<int>(k), params, 1, 0.05 + 0.9 * rng.uniform01()));
            total += updates.back().reported_accuracy;
        }
        double weight_sum = 0.0;
        for (const auto& u : updates) weight_sum += u.reported_accuracy / total;
        CHECK(std::abs(weight_sum - 1.0) < 1e-12);

        const auto got = accuracy_weighted_aggregate(updates);
        const auto want = oracles::brute_force_accuracy_weighted(updates);
        for (std::size_t i = 0; i < len; ++i) CHECK(std::abs(got[i] - want[i]) < 1e-12);
    }
}

TEST_CASE("sample_update draws seeded distinct sorted indices") {
    const ParamVector params{1.0, 2.0, 3.0, 4.0};
    SUBCASE("full fraction includes every index") {
        const auto u = sample_update(params, 1.0, 5);
        CHECK(u.sparse().indices == std::vector<std::size_t>{0, 1, 2, 3});
        CHECK(u.sparse().values == params);
    }
    SUBCASE("half fraction takes ceil(0.5 * 4) = 2 indices, deterministically") {
        const auto a = sample_update(params, 0.5, 5);
        const auto b = sample_update(params, 0.5, 5);
        CHECK(a.sparse().indices.size() == 2);
        CHECK(a.sparse().indices == b.sparse().indices);
        for (std::size_t k = 0; k < 2; ++k)
            CHECK(a.sparse().values[k] == params[a.sparse().indices[k]]);
    }
    SUBCASE("different client seeds generally give different masks") {
        int distinct = 0;
        for (std::uint64_t client = 0; client < 8; ++client) {
            const auto a =
                sample_update(params, 0.5, derive_seed(9, SeedDomain::UploadMask, 0, client));
            const auto b =
                sample_update(params, 0.5, derive_seed(9, SeedDomain::UploadMask, 0, client + 1));
            if (a.sparse().indices != b.sparse().indices) ++distinct;
        }
        CHECK(distinct > 0);
    }
    SUBCASE("fraction must be positive") {
        CHECK_THROWS_AS(sample_update(params, 0.0, 1), ValidationError);
        CHECK_THROWS_AS(sample_update(params, 1.5, 1), ValidationError);
    }
}

TEST_CASE("merge_sparse semantics") {
    GlobalModel global;
    global.params = {10.0, 20.0, 30.0, 40.0};
    global.version = 3;

    SUBCASE("full reporting with full downlink collapses to the plain mean") {
        ModelUpdate a, b;
        a.payload = SparsePayload{{0, 1, 2, 3}, {1.0, 2.0, 3.0, 4.0}};
        b.payload = SparsePayload{{0, 1, 2, 3}, {3.0, 4.0, 5.0, 6.0}};
        const auto merged = merge_sparse(global, {a, b}, 1.0, 7);
        CHECK(merged.global.params == ParamVector{2.0, 3.0, 4.0, 5.0});
        CHECK(merged.global.version == 4);
        CHECK(merged.downlink.indices.size() == 4);
    }
    SUBCASE("unreported indices retain the previous global value") {
        ModelUpdate a;
        a.payload = SparsePayload{{1}, {99.0}};
        const auto merged = merge_sparse(global, {a}, 1.0, 7);
        CHECK(merged.global.params == ParamVector{10.0, 99.0, 30.0, 40.0});
    }
    SUBCASE("empty update list is rejected") {
        CHECK_THROWS_AS(merge_sparse(global, {}, 1.0, 7), ValidationError);
    }
    SUBCASE("out-of-bounds and unsorted indices are structural errors") {
        ModelUpdate bad;
        bad.payload = SparsePayload{{5}, {1.0}};
        CHECK_THROWS_AS(merge_sparse(global, {bad}, 1.0, 7), StructuralError);
        bad.payload = SparsePayload{{2, 1}, {1.0, 2.0}};
        CHECK_THROWS_AS(merge_sparse(global, {bad}, 1.0, 7), StructuralError);
    }
}

TEST_CASE("merge_sparse matches the exhaustive per-index oracle") {
    Rng rng(109);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t len = 6;
        GlobalModel global;
        global.params.resize(len);
        for (auto& v : global.params) v = rng.uniform(-2.0, 2.0);

        std::vector<ModelUpdate> updates;
        const std::size_t clients = 1 + rng.uniform_int(3);
        for (std::size_t k = 0; k < clients; ++k) {
            ParamVector params(len);
            for (auto& v : params) v = rng.uniform(-2.0, 2.0);
            auto u = sample_update(params, 0.5, rng.next_u64());
            u.client_id = static_cast<int>(k);
            u.n_samples = 1;
            updates.push_back(std::move(u));
        }
        const auto merged = merge_sparse(global, updates, 1.0, rng.next_u64());
        const auto want = oracles::brute_force_sparse_merge(global.params, updates);
        for (std::size_t i = 0; i < len; ++i)
            CHECK(std::abs(merged.global.params[i] - want[i]) < 1e-12);

        // Merged values stay within the contributed range (or equal the
        // retained global value).
        for (std::size_t i = 0; i < len; ++i) {
            double lo = 1e300, hi = -1e300;
            bool reported = false;
            for (const auto& u : updates) {
                const auto& s = u.sparse();
                for (std::size_t k = 0; k < s.indices.size(); ++k)
                    if (s.indices[k] == i) {
                        lo = std::min(lo, s.values[k]);
                        hi = std::max(hi, s.values[k]);
                        reported = true;
                    }
            }
            if (reported) {
                CHECK(merged.global.params[i] >= lo - 1e-12);
                CHECK(merged.global.params[i] <= hi + 1e-12);
            } else {
                CHECK(merged.global.params[i] == global.params[i]);
            }
        }
    }
}

TEST_CASE("run_round with one client adopts that client's trained params") {
    std::vector<Client> clients{shift_client(0, 10, 0.5)};
    GlobalModel global;
    global.params = {1.0, 1.0};
    const auto result = run_round(clients, global, {}, 1, 42, null_metrics);
    CHECK(result.global.params == ParamVector{1.5, 1.5});
    CHECK(result.global.version == 1);
    REQUIRE(result.record.clients.size() == 1);
    CHECK(result.record.clients[0].client_id == 0);
}

TEST_CASE("run_round requires clients and nonnegative epochs") {
    std::vector<Client> none;
    GlobalModel global;
    global.params = {0.0};
    CHECK_THROWS_AS(run_round(none, global, {}, 1, 1, null_metrics), ValidationError);
    std::vector<Client> one{shift_client(0, 1, 0.1)};
    CHECK_THROWS_AS(run_round(one, global, {}, -1, 1, null_metrics), ValidationError);
}

TEST_CASE("round transcripts are identical across reruns") {
    const auto run_twice = [] {
        std::vector<Client> clients;
        for (int k = 0; k < 5; ++k) clients.push_back(shift_client(k, 10, 0.1 * (k + 1)));
        for (auto& c : clients) c.local_params = {0.0, 0.0};
        GlobalModel global;
        global.params = {0.0, 0.0};
        std::vector<RoundRecord> records;
        for (int r = 0; r < 3; ++r) {
            auto result = run_round(clients, global, {}, 1, 2024, null_metrics);
            global = result.global;
            records.push_back(result.record);
        }
        return std::make_pair(global.params, records);
    };
    const auto a = run_twice();
    const auto b = run_twice();
    CHECK(a.first == b.first);
    REQUIRE(a.second.size() == b.second.size());
    for (std::size_t r = 0; r < a.second.size(); ++r) {
        CHECK(a.second[r].bytes_exchanged == b.second[r].bytes_exchanged);
        CHECK(a.second[r].clients.size() == b.second[r].clients.size());
    }
}

TEST_CASE("version increases by exactly one per aggregation") {
    std::vector<Client> clients{shift_client(0, 4, 0.2), shift_client(1, 4, -0.1)};
    for (auto& c : clients) c.local_params = {0.0};
    GlobalModel global;
    global.params = {0.0};
    for (int r = 0; r < 4; ++r) {
        const auto result = run_round(clients, global, {}, 1, 5, null_metrics);
        CHECK(result.global.version == global.version + 1);
        global = result.global;
    }
}

TEST_CASE("sampled merge with full fractions matches fedavg bitwise") {
    AggregationStrategy fed_strategy;
    AggregationStrategy merge_strategy;
    merge_strategy.kind = AggregationKind::SampledMerge;
    merge_strategy.sample_fraction_up = 1.0;
    merge_strategy.sample_fraction_down = 1.0;

    const auto run_with = [](const AggregationStrategy& strategy) {
        std::vector<Client> clients;
        for (int k = 0; k < 4; ++k) clients.push_back(shift_client(k, 25, 0.05 * (k + 1)));
        GlobalModel global;
        global.params = {0.25, -1.5, 3.0};
        for (auto& c : clients) c.local_params = global.params;
        std::vector<RoundRecord> records;
        for (int r = 0; r < 3; ++r) {
            auto result = run_round(clients, global, strategy, 1, 77, null_metrics);
            global = result.global;
            records.push_back(result.record);
        }
        return std::make_pair(global, records);
    };

    const auto via_fedavg = run_with(fed_strategy);
    const auto via_merge = run_with(merge_strategy);
    CHECK(via_fedavg.first.params == via_merge.first.params); // bitwise
    CHECK(via_fedavg.first.version == via_merge.first.version);
    for (std::size_t r = 0; r < 3; ++r) {
        CHECK(via_fedavg.second[r].bytes_exchanged == via_merge.second[r].bytes_exchanged);
        for (std::size_t k = 0; k < via_fedavg.second[r].clients.size(); ++k) {
            CHECK(via_fedavg.second[r].clients[k].train_loss ==
                  via_merge.second[r].clients[k].train_loss);
            CHECK(via_fedavg.second[r].clients[k].train_accuracy ==
                  via_merge.second[r].clients[k].train_accuracy);
        }
    }
}

TEST_CASE("accuracy-weighted round falls back to fedavg when all accuracies are zero") {
    const auto zero_acc_client = [](int id, double delta) {
        Client c;
        c.id = id;
        c.n_samples = 10;
        c.train = [delta](const ParamVector& start, int, std::uint64_t) {
            LocalTrainOutcome out;
            out.params = start;
            for (auto& v : out.params) v += delta;
            out.accuracy = 0.0;
            return out;
        };
        return c;
    };
    std::vector<Client> clients{zero_acc_client(0, 1.0), zero_acc_client(1, 3.0)};
    for (auto& c : clients) c.local_params = {0.0};
    GlobalModel global;
    global.params = {0.0};
    AggregationStrategy strategy;
    strategy.kind = AggregationKind::AccuracyWeighted;
    const auto result = run_round(clients, global, strategy, 1, 1, null_metrics);
    CHECK(result.global.params[0] == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("update validation catches malformed payloads") {
    ModelUpdate u = dense_update(0, {1.0, 2.0}, 1, 0.5);
    CHECK_NOTHROW(u.validate(2));
    CHECK_THROWS_AS(u.validate(3), StructuralError);
    u.reported_accuracy = 1.5;
    CHECK_THROWS_AS(u.validate(2), ValidationError);
}
