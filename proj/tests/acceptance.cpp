// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Oracles here are independent re-implementations; they do
// not call the code paths they check.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <vector>

#include "oracles.hpp"
#include "qfl/experiment.hpp"
#include "qfl/rng.hpp"
#include "qfl/satsched.hpp"
#include "qfl/topology.hpp"

using namespace qfl;

namespace {

int g_failures = 0;

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

void report(int criterion, const std::string& what, bool ok, double seconds) {
    std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << criterion << ": " << what << " ("
              << harness::format_double(seconds) << " s)\n";
    if (!ok) ++g_failures;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path scratch_dir() {
    const auto dir = std::filesystem::temp_directory_path() / "qfl_acceptance";
    std::filesystem::create_directories(dir);
    return dir;
}

// ---- criterion 1: Deutsch-Jozsa exactness over every oracle with n <= 4 ----

bool check_deutsch_jozsa() {
    for (int n = 1; n <= 4; ++n) {
        const std::size_t size = 1ULL << n;
        // Both constant functions.
        for (int v = 0; v <= 1; ++v) {
            const double p = qsim::deutsch_jozsa_zero_prob(
                qsim::BooleanOracle(n, std::vector<std::uint8_t>(size, std::uint8_t(v))));
            if (std::abs(p - 1.0) > 1e-12) return false;
        }
        // Every balanced function: subsets of weight size/2 via Gosper's hack.
        const std::uint64_t ones = size / 2;
        std::uint64_t mask = (1ULL << ones) - 1;
        const std::uint64_t limit = 1ULL << size;
        while (mask < limit) {
            std::vector<std::uint8_t> table(size, 0);
            for (std::size_t x = 0; x < size; ++x) table[x] = (mask >> x) & 1ULL;
            const double p = qsim::deutsch_jozsa_zero_prob(qsim::BooleanOracle(n, table));
            if (std::abs(p) > 1e-12) return false;
            const std::uint64_t c = mask & (~mask + 1);
            const std::uint64_t r = mask + c;
            mask = (((r ^ mask) >> 2) / c) | r;
        }
    }
    return true;
}

// ---- criterion 2: parameter-shift gradients vs finite differences ----------

bool check_gradients() {
    Rng rng(20250809);
    for (int trial = 0; trial < 20; ++trial) {
        vqc::VqcSpec spec{1 + static_cast<int>(rng.uniform_int(4)),
                          1 + static_cast<int>(rng.uniform_int(3))};
        vqc::ParamVector params(spec.param_count());
        for (auto& p : params) p = rng.uniform(-1.5, 1.5);
        vqc::FeatureVector features(spec.n_qubits);
        for (auto& f : features) f = rng.uniform(-1.5, 1.5);
        std::vector<double> weights(spec.n_qubits);
        for (auto& w : weights) w = rng.uniform(-1.0, 1.0);

        const auto shift = vqc::parameter_shift_grad(spec, params, features, weights);
        const auto fd = oracles::finite_difference_grad(spec, params, features, weights);
        for (std::size_t k = 0; k < shift.size(); ++k)
            if (std::abs(shift[k] - fd[k]) > 1e-5) return false;
    }
    return true;
}

// ---- criterion 3: aggregation oracles and the rho = 1 transcript ------------

fed::ModelUpdate dense_update(int id, fed::ParamVector params, std::size_t n, double acc) {
    fed::ModelUpdate u;
    u.client_id = id;
    u.payload = std::move(params);
    u.n_samples = n;
    u.reported_accuracy = acc;
    return u;
}

bool check_aggregation_oracles() {
    Rng rng(33);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t clients = 1 + rng.uniform_int(5);
        const std::size_t len = 1 + rng.uniform_int(8);
        std::vector<fed::ModelUpdate> updates;
        for (std::size_t k = 0; k < clients; ++k) {
            fed::ParamVector params(len);
            for (auto& v : params) v = rng.uniform(-5.0, 5.0);
            updates.push_back(dense_update(static_cast<int>(k), params, 1 + rng.uniform_int(40),
                                           0.05 + 0.9 * rng.uniform01()));
        }
        const auto avg = fed::fedavg(updates);
        const auto avg_oracle = oracles::brute_force_fedavg(updates);
        const auto acc = fed::accuracy_weighted_aggregate(updates);
        const auto acc_oracle = oracles::brute_force_accuracy_weighted(updates);
        for (std::size_t i = 0; i < len; ++i) {
            if (std::abs(avg[i] - avg_oracle[i]) > 1e-12) return false;
            if (std::abs(acc[i] - acc_oracle[i]) > 1e-12) return false;
        }

        // Sparse merge against the exhaustive per-index oracle.
        fed::GlobalModel global;
        global.params.resize(len);
        for (auto& v : global.params) v = rng.uniform(-2.0, 2.0);
        std::vector<fed::ModelUpdate> sparse;
        for (std::size_t k = 0; k < clients; ++k) {
            fed::ParamVector params(len);
            for (auto& v : params) v = rng.uniform(-2.0, 2.0);
            auto u = fed::sample_update(params, 0.25 + 0.75 * rng.uniform01(), rng.next_u64());
            u.client_id = static_cast<int>(k);
            u.n_samples = 1;
            sparse.push_back(std::move(u));
        }
        const auto merged = fed::merge_sparse(global, sparse, 1.0, rng.next_u64());
        const auto merged_oracle = oracles::brute_force_sparse_merge(global.params, sparse);
        for (std::size_t i = 0; i < len; ++i)
            if (std::abs(merged.global.params[i] - merged_oracle[i]) > 1e-12) return false;
    }
    return true;
}

harness::ExperimentConfig transcript_config(const std::string& aggregation) {
    std::ostringstream json;
    json << R"({
        "name": "transcript",
        "seed": 7101,
        "rounds": 3,
        "local_epochs": 1,
        "learning_rate": 0.35,
        "model": {"kind": "vqc", "n_qubits": 3, "n_layers": 1},
        "dataset": {"kind": "blobs", "n": 150, "dims": 3},
        "partition": {"scheme": "iid", "n_clients": 5},
        "aggregation": {"kind": ")"
         << aggregation << R"(", "sample_fraction_up": 1.0, "sample_fraction_down": 1.0},
        "topology": {"kind": "centralized"}
    })";
    return harness::parse_config(json.str());
}

bool check_rho_one_transcript() {
    // 150 samples -> 120 train -> 24 per client: equal shards, so the rho=1
    // sampled-merge transcript must be byte-identical to fedavg.
    const auto dir_a = (scratch_dir() / "rho_fedavg").string();
    const auto dir_b = (scratch_dir() / "rho_merge").string();
    const auto a = harness::run_experiment(transcript_config("fedavg"), dir_a);
    const auto b = harness::run_experiment(transcript_config("sampled_merge"), dir_b);
    return slurp(a.results_path) == slurp(b.results_path) &&
           a.final_global.params == b.final_global.params;
}

// ---- criterion 4: topology equivalences -------------------------------------

bool check_hierarchical_equivalence() {
    Metrics (*null_metrics)(const fed::ParamVector&) = [](const fed::ParamVector&) {
        return Metrics{};
    };
    Rng rng(55);
    for (int trial = 0; trial < 50; ++trial) {
        const int n_clients = 2 + static_cast<int>(rng.uniform_int(6));
        const int n_edges = 1 + static_cast<int>(rng.uniform_int(4));
        std::vector<fed::Client> hier_clients, flat_clients;
        for (int k = 0; k < n_clients; ++k) {
            fed::Client c;
            c.id = k;
            c.n_samples = 1 + rng.uniform_int(60);
            const double delta = rng.uniform(-1.0, 1.0);
            c.train = [delta](const fed::ParamVector& start, int, std::uint64_t) {
                fed::LocalTrainOutcome out;
                out.params = start;
                for (auto& v : out.params) v += delta;
                out.accuracy = 0.5;
                return out;
            };
            hier_clients.push_back(c);
            flat_clients.push_back(c);
        }

        topology::TopologyConfig hier;
        hier.kind = topology::TopologyKind::Hierarchical;
        hier.rounds = 1;
        for (int k = 0; k < n_clients; ++k)
            hier.cluster_of[k] = static_cast<int>(rng.uniform_int(n_edges));
        topology::TopologyConfig flat;
        flat.rounds = 1;

        fed::GlobalModel initial;
        initial.params = {0.0, 0.5};
        const auto via_hier = topology::run_hierarchical(hier_clients, initial, hier, {}, 1, 3,
                                                         null_metrics);
        const auto via_flat = topology::run_centralized(flat_clients, initial, flat, {}, 1, 3,
                                                        null_metrics);
        for (std::size_t i = 0; i < initial.params.size(); ++i)
            if (std::abs(via_hier.global.params[i] - via_flat.global.params[i]) > 1e-12)
                return false;
    }
    return true;
}

bool check_single_cluster_transcript() {
    // Same experiment through the real training stack: one-cluster
    // hierarchical must produce a byte-identical results file to
    // centralized.
    const auto config_with_topology = [](const std::string& topology_object) {
        return harness::parse_config(R"({
            "name": "tiers",
            "seed": 1313,
            "rounds": 3,
            "local_epochs": 1,
            "learning_rate": 0.35,
            "model": {"kind": "vqc", "n_qubits": 3, "n_layers": 1},
            "dataset": {"kind": "blobs", "n": 120, "dims": 3},
            "partition": {"scheme": "iid", "n_clients": 4},
            "aggregation": {"kind": "fedavg"},
            "topology": )" +
                                     topology_object + "}");
    };
    const auto a = harness::run_experiment(config_with_topology(R"({"kind": "centralized"})"),
                                           (scratch_dir() / "tiers_central").string());
    const auto b = harness::run_experiment(
        config_with_topology(R"({"kind": "hierarchical", "clusters": [0, 0, 0, 0]})"),
        (scratch_dir() / "tiers_hier").string());
    return slurp(a.results_path) == slurp(b.results_path) &&
           a.final_global.params == b.final_global.params;
}

// ---- criterion 5: sat-QFL vs an independent discrete-event oracle -----------

namespace des_oracle {

// Minimal independent model of the trace: raw window list plus node kinds.
struct W {
    int a, b;
    double open, close, rate;
};
struct Net {
    std::map<int, bool> ground;
    std::vector<W> windows;
    std::vector<int> sats() const {
        std::vector<int> out;
        for (const auto& [id, g] : ground)
            if (!g) out.push_back(id);
        return out;
    }
    std::vector<int> grounds() const {
        std::vector<int> out;
        for (const auto& [id, g] : ground)
            if (g) out.push_back(id);
        return out;
    }
    bool open_between(int x, int y, double t) const {
        for (const auto& w : windows)
            if (((w.a == x && w.b == y) || (w.a == y && w.b == x)) && w.open <= t && t < w.close)
                return true;
        return false;
    }
    // Earliest completed hop start for a payload ready at `ready`.
    std::optional<std::pair<double, double>> hop(int x, int y, double ready, double bytes,
                                                 double overhead) const {
        std::optional<std::pair<double, double>> best; // (start, duration)
        for (const auto& w : windows) {
            if (!((w.a == x && w.b == y) || (w.a == y && w.b == x))) continue;
            const double dur = bytes / w.rate + overhead;
            const double start = std::max(w.open, ready);
            if (start + dur <= w.close && (!best || start < best->first))
                best = std::make_pair(start, dur);
        }
        return best;
    }
    std::optional<double> window_close_of(int x, int y, double start) const {
        for (const auto& w : windows)
            if (((w.a == x && w.b == y) || (w.a == y && w.b == x)) && w.open <= start &&
                start < w.close)
                return w.close;
        return std::nullopt;
    }
};

Net parse(const std::string& text, const sat::VisibilityGraph& names) {
    // Uses the production graph only to translate names to ids; all window
    // data is re-read from the raw text.
    Net net;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string kind;
        if (!(ls >> kind)) continue;
        if (kind == "node") {
            std::string name, nk;
            ls >> name >> nk;
            net.ground[names.id_of(name)] = nk == "ground";
        } else {
            std::string a, b;
            double open, close, rate;
            ls >> a >> b >> open >> close >> rate;
            const int ia = names.id_of(a), ib = names.id_of(b);
            if (!net.ground.count(ia)) net.ground[ia] = false;
            if (!net.ground.count(ib)) net.ground[ib] = false;
            net.windows.push_back({ia, ib, open, close, rate});
        }
    }
    return net;
}

struct Roles {
    std::set<int> primary, secondary;
};

Roles roles(const Net& net, double t) {
    Roles r;
    for (int s : net.sats())
        for (int g : net.grounds())
            if (net.open_between(s, g, t)) r.primary.insert(s);
    // Iterative closure from the primaries over satellite edges open at t.
    std::set<int> reach = r.primary;
    bool grew = true;
    while (grew) {
        grew = false;
        for (int s : net.sats()) {
            if (reach.count(s)) continue;
            for (int u : reach)
                if (net.open_between(s, u, t)) {
                    reach.insert(s);
                    grew = true;
                    break;
                }
        }
    }
    for (int s : net.sats())
        if (reach.count(s) && !r.primary.count(s)) r.secondary.insert(s);
    return r;
}

// Relay path: fewest hops to a primary over edges open at t, ties by lowest
// id, then the lowest-id open ground station.
std::vector<int> path_to_ground(const Net& net, const Roles& r, int s, double t) {
    std::map<int, int> dist;
    for (int p : r.primary) dist[p] = 0;
    bool grew = true;
    while (grew) {
        grew = false;
        for (int u : net.sats()) {
            if (dist.count(u)) continue;
            int best = -1;
            for (int v : net.sats())
                if (dist.count(v) && net.open_between(u, v, t))
                    if (best < 0 || dist[v] + 1 < best) best = dist[v] + 1;
            if (best > 0) {
                dist[u] = best;
                grew = true;
            }
        }
    }
    std::vector<int> path{s};
    int u = s;
    while (!r.primary.count(u)) {
        int next = -1;
        for (int v : net.sats())
            if (dist.count(v) && dist[v] == dist[u] - 1 && net.open_between(u, v, t))
                if (next < 0 || v < next) next = v;
        path.push_back(next);
        u = next;
    }
    int g_best = -1;
    for (int g : net.grounds())
        if (net.open_between(u, g, t) && (g_best < 0 || g < g_best)) g_best = g;
    path.push_back(g_best);
    return path;
}

struct Outcome {
    std::set<int> arrived;
    double total_seconds = 0.0;
    std::map<std::pair<int, int>, double> link_seconds;
};

void book(Outcome& out, int x, int y, double seconds) {
    out.total_seconds += seconds;
    out.link_seconds[{std::min(x, y), std::max(x, y)}] += seconds;
}

Outcome sequential(const Net& net, double t0, double bytes, double oh) {
    const Roles r = roles(net, t0);
    Outcome out;
    double clock = t0;
    for (int s : r.secondary) {
        const auto path = path_to_ground(net, r, s, t0);
        double ready = clock;
        bool alive = true;
        for (std::size_t i = 0; i + 1 < path.size() && alive; ++i) {
            const auto fit = net.hop(path[i], path[i + 1], ready, bytes, oh);
            if (!fit) {
                alive = false;
            } else {
                ready = fit->first + fit->second;
                book(out, path[i], path[i + 1], fit->second);
            }
        }
        clock = ready; // air time of completed hops counts even on failure
        if (alive) out.arrived.insert(s);
    }
    for (int p : r.primary) {
        int g_best = -1;
        for (int g : net.grounds())
            if (net.open_between(p, g, t0) && (g_best < 0 || g < g_best)) g_best = g;
        const auto fit = net.hop(p, g_best, clock, bytes, oh);
        if (fit) {
            clock = fit->first + fit->second;
            book(out, p, g_best, fit->second);
            out.arrived.insert(p);
        }
    }
    return out;
}

Outcome simultaneous(const Net& net, double t0, double bytes, double oh) {
    const Roles r = roles(net, t0);
    Outcome out;
    std::map<int, double> primary_ready;
    std::map<int, std::set<int>> primary_members;
    for (int p : r.primary) {
        primary_ready[p] = t0;
        primary_members[p] = {p};
    }
    for (int s : r.secondary) {
        const auto path = path_to_ground(net, r, s, t0);
        // chain ends at the primary (second to last entry).
        double ready = t0;
        bool alive = true;
        for (std::size_t i = 0; i + 2 < path.size() && alive; ++i) {
            const auto fit = net.hop(path[i], path[i + 1], ready, bytes, oh);
            if (!fit) {
                alive = false;
            } else {
                ready = fit->first + fit->second;
                book(out, path[i], path[i + 1], fit->second);
            }
        }
        if (alive) {
            const int p = path[path.size() - 2];
            primary_ready[p] = std::max(primary_ready[p], ready);
            primary_members[p].insert(s);
        }
    }
    for (int p : r.primary) {
        int g_best = -1;
        for (int g : net.grounds())
            if (net.open_between(p, g, t0) && (g_best < 0 || g < g_best)) g_best = g;
        const auto fit = net.hop(p, g_best, primary_ready[p], bytes, oh);
        if (fit) {
            book(out, p, g_best, fit->second);
            out.arrived.insert(primary_members[p].begin(), primary_members[p].end());
        }
    }
    return out;
}

Outcome asynchronous(const Net& net, double t0, double bytes, double oh) {
    const Roles r = roles(net, t0);
    Outcome out;
    // Tree order: push payloads toward the ground, deepest first.
    std::map<int, std::vector<std::pair<double, std::set<int>>>> held; // avail, members
    std::map<int, int> depth;
    for (int p : r.primary) {
        held[p].push_back({t0, {p}});
        depth[p] = 1;
    }
    for (int s : r.secondary) {
        held[s].push_back({t0, {s}});
        depth[s] = static_cast<int>(path_to_ground(net, r, s, t0).size()) - 1;
    }
    std::vector<int> order;
    for (const auto& [id, _] : held) order.push_back(id);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return depth[a] != depth[b] ? depth[a] > depth[b] : a < b;
    });
    for (int u : order) {
        const auto path = path_to_ground(net, r, u, t0);
        const int parent = path[1];
        auto& payloads = held[u];
        std::sort(payloads.begin(), payloads.end(),
                  [](const auto& a, const auto& b) {
                      return a.first != b.first ? a.first < b.first
                                                : *a.second.begin() < *b.second.begin();
                  });
        double cursor = -1.0;
        std::map<double, std::set<int>> arrivals; // window close -> members
        for (const auto& [avail, members] : payloads) {
            const auto fit = net.hop(u, parent, std::max(avail, cursor), bytes, oh);
            if (!fit) continue;
            cursor = fit->first + fit->second;
            book(out, u, parent, fit->second);
            const auto close = net.window_close_of(u, parent, fit->first);
            arrivals[*close].insert(members.begin(), members.end());
        }
        for (const auto& [close, members] : arrivals) {
            if (net.ground.at(parent))
                out.arrived.insert(members.begin(), members.end());
            else
                held[parent].push_back({close, members});
        }
    }
    return out;
}

} // namespace des_oracle

bool check_sat_soundness() {
    const std::vector<const char*> traces = {
        // linear relay chain
        R"(node G ground
node S1 satellite
node S2 satellite
window S1 G  0 100 1000000
window S2 S1 0 100 1000000
)",
        // two secondaries feeding one primary, plus an isolated satellite
        R"(node G ground
node A satellite
node B satellite
node C satellite
node D satellite
window A G 0 50 2000000
window B A 0 50 1000000
window C A 0 50 1000000
window D C 60 70 1000000
)",
        // short windows force the async close-of-window behavior and drops
        R"(node G ground
node S1 satellite
node S2 satellite
node S3 satellite
window S1 G  0 2 1000000
window S1 G  5 8 1000000
window S2 S1 0 2 1000000
window S3 S2 0 1 1000000
)",
        // deep relay with mid-chain merging and one starved batch
        R"(node G ground
node S1 satellite
node S2 satellite
node S3 satellite
node S4 satellite
window S1 G  0 3  1000000
window S1 G 10 14 1000000
window S2 S1 0 6  1000000
window S3 S2 0 4  1000000
window S4 S2 0 4  1000000
)",
        // chains that die mid-way after spending air time
        R"(node G ground
node A satellite
node Y satellite
node X satellite
node Z satellite
window A G 0 100 1000000
window Y A 0 0.5 1000000
window X Y 0 50  1000000
window Z A 0 100 1000000
)",
    };
    const double bytes = 1000000, overhead = 0.05;

    for (const char* text : traces) {
        const auto graph = sat::VisibilityGraph::parse_trace(text);
        const auto net = des_oracle::parse(text, graph);

        // Roles agree with the definition-level oracle across the span.
        for (double t = graph.span_begin(); t < graph.span_end(); t += 0.25) {
            const auto got = sat::roles_at(graph, t);
            const auto want = des_oracle::roles(net, t);
            for (const auto& [s, role] : got.satellite_roles) {
                const bool p = want.primary.count(s) > 0;
                const bool sec = want.secondary.count(s) > 0;
                if (role == sat::Role::Primary && !p) return false;
                if (role == sat::Role::Secondary && !sec) return false;
                if (role == sat::Role::NonParticipant && (p || sec)) return false;
            }
        }

        std::map<int, fed::ModelUpdate> updates;
        for (int s : graph.satellite_ids()) updates.emplace(s, dense_update(s, {1.0 + s}, 10, 0.5));

        for (const auto mode : {sat::TransferMode::Sequential, sat::TransferMode::Simultaneous,
                                sat::TransferMode::Asynchronous}) {
            const auto schedule = sat::plan_transfers(graph, mode, 0.0, bytes, overhead);
            const auto exec = sat::execute_schedule(schedule, graph, updates);

            des_oracle::Outcome want;
            switch (mode) {
                case sat::TransferMode::Sequential:
                    want = des_oracle::sequential(net, 0.0, bytes, overhead);
                    break;
                case sat::TransferMode::Simultaneous:
                    want = des_oracle::simultaneous(net, 0.0, bytes, overhead);
                    break;
                default:
                    want = des_oracle::asynchronous(net, 0.0, bytes, overhead);
                    break;
            }
            const std::set<int> got_arrived(exec.arrived.begin(), exec.arrived.end());
            if (got_arrived != want.arrived) return false;
            if (exec.total_seconds != want.total_seconds) return false;
            std::map<std::pair<int, int>, double> got_links;
            for (const auto& link : exec.per_link_seconds)
                got_links[{link.node_a, link.node_b}] = link.seconds;
            if (got_links != want.link_seconds) return false;
        }
    }
    return true;
}

bool check_sat_degenerate_case() {
    // Static fully connected constellation: everyone is primary and the
    // simultaneous round must reproduce a flat centralized round.
    const char* text = R"(node G ground
node S1 satellite
node S2 satellite
node S3 satellite
window S1 G 0 1000000000 1000000
window S2 G 0 1000000000 1000000
window S3 G 0 1000000000 1000000
window S1 S2 0 1000000000 1000000
window S1 S3 0 1000000000 1000000
window S2 S3 0 1000000000 1000000
)";
    const auto graph = sat::VisibilityGraph::parse_trace(text);
    const auto roles = sat::roles_at(graph, 0.0);
    for (const auto& [s, role] : roles.satellite_roles)
        if (role != sat::Role::Primary) return false;

    // Real VQC clients, ids matched to the satellites.
    harness::SynthOptions synth;
    synth.dims = 3;
    const auto data = harness::synth_dataset(harness::SynthKind::Blobs, 120, 2024, synth);
    const auto split = harness::train_test_split(data, 0.25, 11);
    harness::PartitionSpec pspec;
    pspec.n_clients = 3;
    pspec.seed = 17;
    const auto shards = harness::partition_dataset(split.train, pspec);
    harness::ModelConfig mc;
    mc.kind = harness::ModelKind::PureVqc;
    mc.n_qubits = 3;
    mc.n_layers = 1;
    const auto model = harness::build_model(mc, split.train, {}, std::nullopt, 5);

    const auto make_clients = [&] {
        std::vector<fed::Client> clients;
        const auto sat_ids = graph.satellite_ids();
        for (std::size_t i = 0; i < shards.size(); ++i) {
            fed::Client c;
            c.id = sat_ids[i];
            c.n_samples = shards[i].n_samples();
            const harness::Dataset* shard = &shards[i];
            const harness::Model* m = model.get();
            c.train = [m, shard](const fed::ParamVector& start, int epochs, std::uint64_t seed) {
                return harness::train_local(*m, *shard, start, epochs, 0.3, seed);
            };
            clients.push_back(std::move(c));
        }
        return clients;
    };
    const fed::Evaluator evaluate = [&](const fed::ParamVector& params) {
        return harness::evaluate_model(*model, params, split.test);
    };

    fed::GlobalModel initial;
    initial.params = model->init_params(77);
    auto sat_clients = make_clients();
    for (auto& c : sat_clients) c.local_params = initial.params;
    sat::SatRoundOptions options;
    options.mode = sat::TransferMode::Simultaneous;
    options.payload_bytes = 1000;
    const auto sat_round =
        sat::run_sat_round(sat_clients, initial, graph, options, 1, 909, evaluate);

    auto flat_clients = make_clients();
    for (auto& c : flat_clients) c.local_params = initial.params;
    const auto flat_round = fed::run_round(flat_clients, initial, {}, 1, 909, evaluate);

    if (sat_round.global.params.size() != flat_round.global.params.size()) return false;
    for (std::size_t i = 0; i < sat_round.global.params.size(); ++i)
        if (std::abs(sat_round.global.params[i] - flat_round.global.params[i]) > 1e-12)
            return false;
    return true;
}

// ---- criterion 6: security behavior -----------------------------------------

bool check_security() {
    const auto qkd = sat::qkd_establish(3, 8, 0.0, 97);
    if (qkd.aborted()) return false;
    const sat::KeyMaterial key = *qkd.key;
    Rng rng(2718);

    for (int trial = 0; trial < 100; ++trial) {
        fed::ParamVector params(32);
        for (auto& v : params) v = rng.uniform(-3.0, 3.0);
        const auto payload = sat::serialize_params(params);
        const sat::Envelope clean = sat::seal(key, payload, 5000 + trial);
        // Clean round trip.
        try {
            if (sat::open_envelope(key, clean) != payload) return false;
        } catch (const AuthenticationError&) {
            return false;
        }
        // One random mutation must be rejected.
        sat::Envelope bad = clean;
        switch (rng.uniform_int(3)) {
            case 0: {
                const std::size_t i = rng.uniform_int(bad.ciphertext.size());
                bad.ciphertext[i] ^= static_cast<std::uint8_t>(1 + rng.uniform_int(255));
                break;
            }
            case 1:
                bad.nonce ^= 1ULL << rng.uniform_int(64);
                break;
            default:
                bad.tag ^= 1ULL << rng.uniform_int(64);
                break;
        }
        try {
            (void)sat::open_envelope(key, bad);
            return false; // tamper accepted
        } catch (const AuthenticationError&) {
        }
    }

    // QKD aborts at flip rate 0.5 and never at 0.0, over 100 seeded sessions.
    for (int s = 0; s < 100; ++s) {
        if (sat::qkd_establish(1, 2, 0.0, 10000 + s).aborted()) return false;
        if (!sat::qkd_establish(1, 2, 0.5, 10000 + s).aborted()) return false;
    }
    return true;
}

// ---- criterion 7: trainability smoke test ------------------------------------

bool check_trainability(double& accuracy_out) {
    const auto cfg = harness::load_config(std::string(QFL_CONFIG_DIR) + "/acceptance_blobs.json");
    const auto result =
        harness::run_experiment(cfg, (scratch_dir() / "trainability").string());
    accuracy_out = result.final_metrics.accuracy;
    // The 5-node, 15-round transcript shape: one row per (round, client).
    if (result.history.size() != 15) return false;
    for (const auto& record : result.history)
        if (record.clients.size() != 5) return false;
    return result.final_metrics.accuracy >= 0.90;
}

// ---- criterion 8: noise scaling and documented degradation -------------------

harness::ExperimentConfig noise_config(double p) {
    std::ostringstream json;
    json << R"({
        "name": "noise",
        "seed": 424242,
        "rounds": 3,
        "local_epochs": 1,
        "learning_rate": 0.05,
        "model": {"kind": "vqc", "n_qubits": 4, "n_layers": 2},
        "dataset": {"kind": "blobs", "n": 400, "dims": 4, "separation": 1.2, "sigma": 0.55},
        "partition": {"scheme": "iid", "n_clients": 5},
        "aggregation": {"kind": "fedavg"},
        "topology": {"kind": "centralized"},
        "noise": {"channel": "depolarizing", "p": )"
         << harness::format_double(p) << "}}";
    return harness::parse_config(json.str());
}

bool check_noise_monotonicity() {
    // Exactness: evaluate the trained p=0 model's Z expectations under each
    // channel strength; every entry must equal (1 - p) times the clean value
    // bit for bit.
    const auto clean_cfg = noise_config(0.0);
    const auto clean = harness::run_experiment(clean_cfg, (scratch_dir() / "noise_p0").string());

    vqc::VqcSpec spec{4, 2};
    harness::SynthOptions synth;
    synth.dims = 4;
    synth.separation = 1.2;
    synth.sigma = 0.55;
    const auto data = harness::synth_dataset(
        harness::SynthKind::Blobs, 64, derive_seed(424242, SeedDomain::DatasetGen), synth);
    for (std::size_t s = 0; s < data.n_samples(); ++s) {
        const auto z0 = vqc::vqc_forward(spec, clean.final_global.params, data.rows[s]);
        for (const double p : {0.0, 0.2, 0.5}) {
            vqc::ForwardOptions options;
            options.noise = {qsim::NoiseChannel::Depolarizing, p};
            const auto zp =
                vqc::vqc_forward(spec, clean.final_global.params, data.rows[s], options);
            for (int q = 0; q < 4; ++q)
                if (zp[q] != (1.0 - p) * z0[q]) return false;
        }
    }

    // Documented (not asserted) accuracy under increasing channel strength.
    std::cout << "        noise degradation (documented, not asserted):";
    for (const double p : {0.0, 0.2, 0.5}) {
        const auto run =
            harness::run_experiment(noise_config(p), (scratch_dir() / "noise_doc").string());
        std::cout << "  p=" << harness::format_double(p)
                  << " accuracy=" << harness::format_double(run.final_metrics.accuracy);
    }
    std::cout << "\n";
    return true;
}

// ---- criterion 9: out-of-scope results statement + comparison script ---------

bool check_comparison_script() {
    std::cout << "        Case-study headline numbers (94.8%, 98.3%, 0.61 one-class-SVM\n"
                 "        accuracy, the 2%/5%/10% QLSTM-over-LSTM margins, and the\n"
                 "        Statlog/EuroSAT results) depend on proprietary or unavailable\n"
                 "        datasets and hardware-scale models; they are not reproduced here.\n"
                 "        Criteria 1-8 plus this reported comparison stand in for them.\n";
    harness::ComparisonConfig cc; // documented defaults
    const auto report = harness::run_qlstm_comparison(cc);
    std::cout << "        qlstm: accuracy=" << harness::format_double(report.qlstm.accuracy)
              << " recall=" << harness::format_double(report.qlstm.recall);
    if (report.qlstm.auc) std::cout << " auc=" << harness::format_double(*report.qlstm.auc);
    std::cout << " (" << report.qlstm_param_count << " trainables)\n";
    std::cout << "        lstm:  accuracy=" << harness::format_double(report.lstm.accuracy)
              << " recall=" << harness::format_double(report.lstm.recall);
    if (report.lstm.auc) std::cout << " auc=" << harness::format_double(*report.lstm.auc);
    std::cout << " (" << report.lstm_param_count << " trainables)\n";
    // Reported, not asserted: the pass condition is that both runs complete
    // with in-range metrics.
    const auto in_range = [](const Metrics& m) {
        return m.accuracy >= 0.0 && m.accuracy <= 1.0 && m.recall >= 0.0 && m.recall <= 1.0;
    };
    return in_range(report.qlstm) && in_range(report.lstm);
}

// ---- criterion 10: byte-identical reruns -------------------------------------

bool check_determinism() {
    // The pinned trainability config.
    const auto cfg = harness::load_config(std::string(QFL_CONFIG_DIR) + "/acceptance_blobs.json");
    const auto a = harness::run_experiment(cfg, (scratch_dir() / "det_a").string());
    const auto b = harness::run_experiment(cfg, (scratch_dir() / "det_b").string());
    if (slurp(a.results_path) != slurp(b.results_path)) return false;
    if (slurp(a.checkpoint_path) != slurp(b.checkpoint_path)) return false;

    // A satellite-scheduled config reruns byte-identically too.
    const auto trace_path = (scratch_dir() / "det_trace.txt").string();
    {
        std::ofstream out(trace_path);
        out << "node G ground\nnode S1 satellite\nnode S2 satellite\nnode S3 satellite\n";
        out << "window S1 G  0 40 1000000\nwindow S2 S1 0 40 1000000\nwindow S3 G 0 40 500000\n";
        out << "window S1 G 45 85 1000000\nwindow S2 S1 45 85 1000000\nwindow S3 G 45 85 500000\n";
    }
    std::ostringstream json;
    json << R"({
        "name": "det_sat",
        "seed": 31415,
        "rounds": 2,
        "local_epochs": 1,
        "learning_rate": 0.3,
        "model": {"kind": "vqc", "n_qubits": 3, "n_layers": 1},
        "dataset": {"kind": "blobs", "n": 90, "dims": 3},
        "partition": {"scheme": "iid", "n_clients": 3},
        "aggregation": {"kind": "fedavg"},
        "topology": {"kind": "centralized"},
        "satsched": {"trace": ")"
         << trace_path << R"(", "mode": "simultaneous", "round_period": 45.0, "secure": true}
    })";
    const auto sat_cfg = harness::parse_config(json.str());
    const auto c = harness::run_experiment(sat_cfg, (scratch_dir() / "det_c").string());
    const auto d = harness::run_experiment(sat_cfg, (scratch_dir() / "det_d").string());
    return slurp(c.results_path) == slurp(d.results_path);
}

} // namespace

int main() {
    std::cout << "qfl-lab acceptance suite\n";

    {
        Timer t;
        const bool ok = check_deutsch_jozsa();
        const double s = t.seconds();
        report(1, "Deutsch-Jozsa exactness over all constant/balanced oracles, n <= 4",
               ok && s < 5.0, s);
    }
    {
        Timer t;
        const bool ok = check_gradients();
        const double s = t.seconds();
        report(2, "parameter-shift gradients match finite differences (20 instances)",
               ok && s < 30.0, s);
    }
    {
        Timer t;
        const bool ok = check_aggregation_oracles() && check_rho_one_transcript();
        report(3, "aggregation strategies match brute-force oracles; rho=1 merge == fedavg", ok,
               t.seconds());
    }
    {
        Timer t;
        const bool ok = check_hierarchical_equivalence() && check_single_cluster_transcript();
        report(4, "hierarchical == flat fedavg (50 assignments); single cluster == centralized",
               ok, t.seconds());
    }
    {
        Timer t;
        const bool ok = check_sat_soundness() && check_sat_degenerate_case();
        report(5, "sat-QFL roles/arrivals/times match the discrete-event oracle; degenerate case",
               ok, t.seconds());
    }
    {
        Timer t;
        const bool ok = check_security();
        report(6, "100/100 tampered envelopes rejected, 100/100 clean round trips, QKD aborts",
               ok, t.seconds());
    }
    {
        Timer t;
        double accuracy = 0.0;
        const bool ok = check_trainability(accuracy);
        const double s = t.seconds();
        report(7,
               "5-client IID blobs, 4-qubit 2-layer VQC, 15 rounds: accuracy " +
                   harness::format_double(accuracy) + " >= 0.90",
               ok && s < 180.0, s);
    }
    {
        Timer t;
        const bool ok = check_noise_monotonicity();
        report(8, "depolarizing scaling is exactly (1-p) at inference; degradation documented",
               ok, t.seconds());
    }
    {
        Timer t;
        const bool ok = check_comparison_script();
        report(9, "irreproducible case-study numbers stated; QLSTM vs LSTM comparison reported",
               ok, t.seconds());
    }
    {
        Timer t;
        const bool ok = check_determinism();
        report(10, "reruns of acceptance configs produce byte-identical results files", ok,
               t.seconds());
    }

    if (g_failures == 0) {
        std::cout << "all acceptance criteria passed\n";
        return 0;
    }
    std::cout << g_failures << " acceptance criteria FAILED\n";
    return 1;
}
