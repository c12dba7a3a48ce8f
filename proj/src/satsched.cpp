#include "qfl/satsched.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>

#include "qfl/rng.hpp"

namespace qfl::sat {

namespace {

std::pair<int, int> link_key(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

} // namespace

VisibilityGraph::VisibilityGraph(std::vector<NodeInfo> nodes, std::vector<Window> windows)
    : nodes_(std::move(nodes)) {
    if (nodes_.empty()) throw ValidationError("visibility graph has no nodes");
    std::set<int> ids;
    for (const auto& n : nodes_)
        if (!ids.insert(n.id).second) throw ValidationError("duplicate node id in graph");

    for (auto& w : windows) {
        if (!ids.count(w.node_a) || !ids.count(w.node_b))
            throw ValidationError("window references unknown node");
        if (w.node_a == w.node_b) throw ValidationError("window endpoints must differ");
        if (!(w.open < w.close)) throw ValidationError("window must have open < close");
        if (!(w.rate_bytes_per_sec > 0.0)) throw ValidationError("window rate must be positive");
    }

    // Merge overlapping windows per pair; a merged stretch keeps one rate, so
    // overlaps with conflicting rates are rejected.
    std::map<std::pair<int, int>, std::vector<Window>> per_pair;
    for (const auto& w : windows) per_pair[link_key(w.node_a, w.node_b)].push_back(w);
    for (auto& [key, list] : per_pair) {
        std::sort(list.begin(), list.end(),
                  [](const Window& x, const Window& y) { return x.open < y.open; });
        std::vector<Window> merged;
        for (const auto& w : list) {
            if (!merged.empty() && w.open <= merged.back().close) {
                if (w.rate_bytes_per_sec != merged.back().rate_bytes_per_sec)
                    throw ValidationError("overlapping windows with different rates");
                merged.back().close = std::max(merged.back().close, w.close);
            } else {
                merged.push_back(w);
            }
        }
        for (const auto& w : merged) windows_.push_back(w);
    }
    std::sort(windows_.begin(), windows_.end(), [](const Window& x, const Window& y) {
        const auto kx = link_key(x.node_a, x.node_b);
        const auto ky = link_key(y.node_a, y.node_b);
        return kx != ky ? kx < ky : x.open < y.open;
    });

    if (windows_.empty()) throw ValidationError("visibility graph has no windows");
    span_begin_ = windows_.front().open;
    span_end_ = windows_.front().close;
    for (const auto& w : windows_) {
        span_begin_ = std::min(span_begin_, w.open);
        span_end_ = std::max(span_end_, w.close);
    }
}

VisibilityGraph VisibilityGraph::parse_trace(const std::string& text) {
    std::vector<NodeInfo> nodes;
    std::vector<Window> windows;
    std::map<std::string, int> name_to_id;
    std::vector<std::array<std::string, 2>> window_names;
    struct RawWindow {
        double open, close, rate;
    };
    std::vector<RawWindow> raw;

    const auto intern = [&](const std::string& name, NodeKind kind, bool declared) {
        auto it = name_to_id.find(name);
        if (it == name_to_id.end()) {
            const int id = static_cast<int>(nodes.size());
            nodes.push_back({id, name, kind});
            name_to_id.emplace(name, id);
            return id;
        }
        if (declared) nodes[it->second].kind = kind;
        return it->second;
    };

    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;
        if (first == "node") {
            std::string name, kind;
            if (!(ls >> name >> kind))
                throw ValidationError("trace line " + std::to_string(line_no) +
                                      ": expected 'node <name> satellite|ground'");
            if (kind != "satellite" && kind != "ground")
                throw ValidationError("trace line " + std::to_string(line_no) +
                                      ": unknown node kind '" + kind + "'");
            intern(name, kind == "ground" ? NodeKind::Ground : NodeKind::Satellite, true);
        } else if (first == "window") {
            std::string a, b;
            double open, close, rate;
            if (!(ls >> a >> b >> open >> close >> rate))
                throw ValidationError(
                    "trace line " + std::to_string(line_no) +
                    ": expected 'window <a> <b> <open> <close> <rate_bytes_per_sec>'");
            window_names.push_back({a, b});
            raw.push_back({open, close, rate});
        } else {
            throw ValidationError("trace line " + std::to_string(line_no) +
                                  ": unknown record '" + first + "'");
        }
    }
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const int a = intern(window_names[i][0], NodeKind::Satellite, false);
        const int b = intern(window_names[i][1], NodeKind::Satellite, false);
        windows.push_back({a, b, raw[i].open, raw[i].close, raw[i].rate});
    }
    return VisibilityGraph(std::move(nodes), std::move(windows));
}

VisibilityGraph VisibilityGraph::load_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open trace file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_trace(buffer.str());
}

bool VisibilityGraph::is_ground(int id) const {
    for (const auto& n : nodes_)
        if (n.id == id) return n.kind == NodeKind::Ground;
    throw StructuralError("unknown node id " + std::to_string(id));
}

std::vector<int> VisibilityGraph::satellite_ids() const {
    std::vector<int> out;
    for (const auto& n : nodes_)
        if (n.kind == NodeKind::Satellite) out.push_back(n.id);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> VisibilityGraph::ground_ids() const {
    std::vector<int> out;
    for (const auto& n : nodes_)
        if (n.kind == NodeKind::Ground) out.push_back(n.id);
    std::sort(out.begin(), out.end());
    return out;
}

int VisibilityGraph::id_of(const std::string& name) const {
    for (const auto& n : nodes_)
        if (n.name == name) return n.id;
    throw ValidationError("unknown node name: " + name);
}

std::optional<Window> VisibilityGraph::open_at(int a, int b, double t) const {
    const auto key = link_key(a, b);
    for (const auto& w : windows_) {
        if (link_key(w.node_a, w.node_b) != key) continue;
        if (w.open <= t && t < w.close) return w;
    }
    return std::nullopt;
}

std::vector<int> VisibilityGraph::neighbors_open(int id, double t) const {
    std::set<int> out;
    for (const auto& w : windows_) {
        if (w.open <= t && t < w.close) {
            if (w.node_a == id) out.insert(w.node_b);
            if (w.node_b == id) out.insert(w.node_a);
        }
    }
    return {out.begin(), out.end()};
}

std::optional<VisibilityGraph::Fit> VisibilityGraph::earliest_fit(int a, int b, double ready,
                                                                  double payload_bytes,
                                                                  double overhead_s) const {
    const auto key = link_key(a, b);
    std::optional<Fit> best;
    for (const auto& w : windows_) {
        if (link_key(w.node_a, w.node_b) != key) continue;
        const double duration = payload_bytes / w.rate_bytes_per_sec + overhead_s;
        const double start = std::max(w.open, ready);
        if (start + duration <= w.close) {
            if (!best || start < best->start) best = Fit{start, duration, w.close};
        }
    }
    return best;
}

RoleAssignment roles_at(const VisibilityGraph& graph, double t) {
    if (t < graph.span_begin() || t > graph.span_end())
        throw ValidationError("roles_at: time outside trace span");

    RoleAssignment roles;
    roles.t = t;
    const auto sats = graph.satellite_ids();
    const auto grounds = graph.ground_ids();

    std::set<int> primaries;
    for (int s : sats) {
        for (int g : grounds) {
            if (graph.open_at(s, g, t)) {
                primaries.insert(s);
                break;
            }
        }
    }

    // Breadth-first reachability to a primary over satellite-satellite edges
    // open at t.
    std::set<int> reachable = primaries;
    std::queue<int> frontier;
    for (int p : primaries) frontier.push(p);
    while (!frontier.empty()) {
        const int u = frontier.front();
        frontier.pop();
        for (int v : graph.neighbors_open(u, t)) {
            if (graph.is_ground(v) || reachable.count(v)) continue;
            reachable.insert(v);
            frontier.push(v);
        }
    }

    for (int s : sats) {
        if (primaries.count(s))
            roles.satellite_roles[s] = Role::Primary;
        else if (reachable.count(s))
            roles.satellite_roles[s] = Role::Secondary;
        else
            roles.satellite_roles[s] = Role::NonParticipant;
    }
    return roles;
}

namespace {

struct Routing {
    RoleAssignment roles;
    std::map<int, int> parent;    // next hop toward ground for every participant
    std::vector<int> primaries;   // ascending
    std::vector<int> secondaries; // ascending
    std::map<int, int> dist;      // hops to the nearest primary
};

Routing compute_routing(const VisibilityGraph& graph, double t) {
    Routing r;
    r.roles = roles_at(graph, t);
    for (const auto& [id, role] : r.roles.satellite_roles) {
        if (role == Role::Primary) r.primaries.push_back(id);
        if (role == Role::Secondary) r.secondaries.push_back(id);
    }

    // Multi-source BFS from the primaries over satellite edges open at t.
    std::queue<int> frontier;
    for (int p : r.primaries) {
        r.dist[p] = 0;
        frontier.push(p);
    }
    while (!frontier.empty()) {
        const int u = frontier.front();
        frontier.pop();
        for (int v : graph.neighbors_open(u, t)) {
            if (graph.is_ground(v) || r.dist.count(v)) continue;
            r.dist[v] = r.dist[u] + 1;
            frontier.push(v);
        }
    }

    // Fewest hops, ties broken by lowest node id.
    for (int s : r.secondaries) {
        int best = -1;
        for (int v : graph.neighbors_open(s, t)) {
            if (graph.is_ground(v)) continue;
            auto it = r.dist.find(v);
            if (it != r.dist.end() && it->second == r.dist.at(s) - 1) {
                if (best < 0 || v < best) best = v;
            }
        }
        r.parent[s] = best;
    }
    for (int p : r.primaries) {
        int best = -1;
        for (int g : graph.ground_ids()) {
            if (graph.open_at(p, g, t) && (best < 0 || g < best)) best = g;
        }
        r.parent[p] = best;
    }
    return r;
}

std::vector<int> chain_to_ground(const Routing& routing, int start) {
    std::vector<int> path{start};
    int u = start;
    while (routing.roles.satellite_roles.count(u)) {
        const int next = routing.parent.at(u);
        path.push_back(next);
        u = next;
    }
    return path; // ends at a ground id
}

TransferEvent make_transfer(double start, int from, int to, std::vector<int> members,
                            double duration, bool completed, double available) {
    TransferEvent e;
    e.kind = EventKind::Transfer;
    e.send_time = start;
    e.from = from;
    e.to = to;
    e.members = std::move(members);
    e.duration = duration;
    e.completed = completed;
    e.complete_time = completed ? start + duration : start;
    e.available_time = available;
    return e;
}

} // namespace

TransferSchedule plan_transfers(const VisibilityGraph& graph, TransferMode mode, double t,
                                std::uint64_t payload_bytes, double security_overhead_s) {
    if (graph.ground_ids().empty())
        throw ValidationError("plan_transfers: at least one ground station required");
    const Routing routing = compute_routing(graph, t);
    const double bytes = static_cast<double>(payload_bytes);

    TransferSchedule schedule;
    schedule.mode = mode;
    schedule.round_start = t;

    // One hop of a relay chain; returns the arrival time or nullopt.
    const auto hop = [&](int from, int to, double ready, const std::vector<int>& members)
        -> std::optional<double> {
        const auto fit = graph.earliest_fit(from, to, ready, bytes, security_overhead_s);
        if (!fit) {
            schedule.events.push_back(make_transfer(ready, from, to, members, 0.0, false, ready));
            return std::nullopt;
        }
        schedule.events.push_back(
            make_transfer(fit->start, from, to, members, fit->duration, true,
                          fit->start + fit->duration));
        return fit->start + fit->duration;
    };

    std::vector<int> arrived_at_ground;
    double last_arrival = t;

    if (mode == TransferMode::Sequential) {
        // Strictly one transmission at a time on a shared timeline. A chain
        // that dies mid-way still spent air time on its completed hops, so
        // the cursor advances to the last completed hop either way.
        double cursor = t;
        for (int s : routing.secondaries) {
            const auto path = chain_to_ground(routing, s);
            std::optional<double> ready = cursor;
            double progressed = cursor;
            for (std::size_t i = 0; i + 1 < path.size() && ready; ++i) {
                ready = hop(path[i], path[i + 1], *ready, {s});
                if (ready) progressed = *ready;
            }
            cursor = progressed;
            if (ready) {
                arrived_at_ground.push_back(s);
                last_arrival = std::max(last_arrival, *ready);
            }
        }
        for (int p : routing.primaries) {
            const int g = routing.parent.at(p);
            const auto end = hop(p, g, cursor, {p});
            if (end) {
                cursor = *end;
                arrived_at_ground.push_back(p);
                last_arrival = std::max(last_arrival, *end);
            }
        }
    } else if (mode == TransferMode::Simultaneous) {
        // Chains run concurrently; each ends at the secondary's nearest
        // primary, which averages before a single uplink.
        std::map<int, std::vector<std::pair<int, double>>> received; // primary -> (origin, time)
        for (int s : routing.secondaries) {
            std::vector<int> path{s};
            int u = s;
            while (routing.roles.satellite_roles.at(u) != Role::Primary) {
                u = routing.parent.at(u);
                path.push_back(u);
            }
            std::optional<double> ready = t;
            for (std::size_t i = 0; i + 1 < path.size() && ready; ++i)
                ready = hop(path[i], path[i + 1], *ready, {s});
            if (ready) received[path.back()].push_back({s, *ready});
        }
        for (int p : routing.primaries) {
            std::vector<int> members{p};
            double ready = t;
            const auto it = received.find(p);
            if (it != received.end() && !it->second.empty()) {
                for (const auto& [origin, at] : it->second) {
                    members.push_back(origin);
                    ready = std::max(ready, at);
                }
                std::sort(members.begin(), members.end());
                TransferEvent avg;
                avg.kind = EventKind::LocalAverage;
                avg.send_time = ready;
                avg.from = p;
                avg.to = p;
                avg.members = members;
                avg.available_time = ready;
                avg.completed = true;
                avg.complete_time = ready;
                schedule.events.push_back(avg);
            }
            const auto end = hop(p, routing.parent.at(p), ready, members);
            if (end) {
                arrived_at_ground.insert(arrived_at_ground.end(), members.begin(), members.end());
                last_arrival = std::max(last_arrival, *end);
            }
        }
    } else {
        // Asynchronous: forward on the next window that fits; payloads
        // received in one window merge and become available at window close.
        struct Payload {
            double avail;
            std::vector<int> members;
        };
        std::map<int, std::vector<Payload>> held;
        std::map<int, int> depth; // hops to ground along the routing tree
        for (int p : routing.primaries) {
            held[p].push_back({t, {p}});
            depth[p] = 1;
        }
        for (int s : routing.secondaries) {
            held[s].push_back({t, {s}});
            depth[s] = routing.dist.at(s) + 1;
        }

        std::vector<int> order;
        for (const auto& [id, _] : held) order.push_back(id);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            return depth[a] != depth[b] ? depth[a] > depth[b] : a < b;
        });

        for (int u : order) {
            auto& payloads = held[u];
            std::sort(payloads.begin(), payloads.end(), [](const Payload& a, const Payload& b) {
                return a.avail != b.avail ? a.avail < b.avail : a.members < b.members;
            });
            const int v = routing.parent.at(u);
            double link_cursor = -1.0;
            // Arrivals at v grouped by the window that carried them.
            std::map<double, Payload> arrivals_by_close;
            for (const auto& payload : payloads) {
                const double ready = std::max(payload.avail, link_cursor);
                const auto fit = graph.earliest_fit(u, v, ready, bytes, security_overhead_s);
                if (!fit) {
                    schedule.events.push_back(
                        make_transfer(payload.avail, u, v, payload.members, 0.0, false,
                                      payload.avail));
                    continue;
                }
                schedule.events.push_back(make_transfer(fit->start, u, v, payload.members,
                                                        fit->duration, true, fit->window_close));
                link_cursor = fit->start + fit->duration;
                auto& bucket = arrivals_by_close[fit->window_close];
                bucket.avail = fit->window_close;
                bucket.members.insert(bucket.members.end(), payload.members.begin(),
                                      payload.members.end());
            }
            for (auto& [close_time, bucket] : arrivals_by_close) {
                std::sort(bucket.members.begin(), bucket.members.end());
                if (graph.is_ground(v)) {
                    TransferEvent agg;
                    agg.kind = EventKind::GroundAggregate;
                    agg.send_time = close_time;
                    agg.from = v;
                    agg.to = v;
                    agg.members = bucket.members;
                    agg.completed = true;
                    agg.complete_time = close_time;
                    agg.available_time = close_time;
                    schedule.events.push_back(agg);
                    arrived_at_ground.insert(arrived_at_ground.end(), bucket.members.begin(),
                                             bucket.members.end());
                    last_arrival = std::max(last_arrival, close_time);
                } else {
                    if (bucket.members.size() > 1) {
                        TransferEvent agg;
                        agg.kind = EventKind::LocalAverage;
                        agg.send_time = close_time;
                        agg.from = v;
                        agg.to = v;
                        agg.members = bucket.members;
                        agg.completed = true;
                        agg.complete_time = close_time;
                        agg.available_time = close_time;
                        schedule.events.push_back(agg);
                    }
                    held[v].push_back(bucket);
                }
            }
        }
    }

    if (mode != TransferMode::Asynchronous && !arrived_at_ground.empty()) {
        std::sort(arrived_at_ground.begin(), arrived_at_ground.end());
        TransferEvent agg;
        agg.kind = EventKind::GroundAggregate;
        agg.send_time = last_arrival;
        agg.from = graph.ground_ids().front();
        agg.to = agg.from;
        agg.members = arrived_at_ground;
        agg.completed = true;
        agg.complete_time = last_arrival;
        agg.available_time = last_arrival;
        schedule.events.push_back(agg);
    }

    std::stable_sort(schedule.events.begin(), schedule.events.end(),
                     [](const TransferEvent& a, const TransferEvent& b) {
                         return a.send_time < b.send_time;
                     });
    return schedule;
}

// ---- simulated QKD and envelopes --------------------------------------------

namespace {

constexpr std::size_t kQkdCheckBits = 128;

std::uint64_t fold_key(const KeyMaterial& key) {
    std::uint64_t h = key.key_id;
    for (std::size_t i = 0; i < key.bytes.size(); i += 8) {
        std::uint64_t chunk = 0;
        for (std::size_t j = 0; j < 8; ++j) chunk = (chunk << 8) | key.bytes[i + j];
        h = splitmix64(h ^ chunk);
    }
    return h;
}

std::uint64_t tag_over(const KeyMaterial& key, std::uint64_t nonce,
                       const std::vector<std::uint8_t>& ciphertext) {
    // FNV-1a over (key digest, nonce, ciphertext), finished with a mix round.
    std::uint64_t h = 1469598103934665603ULL;
    const auto absorb = [&](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xffULL;
            h *= 1099511628211ULL;
        }
    };
    absorb(fold_key(key));
    absorb(nonce);
    for (std::uint8_t b : ciphertext) {
        h ^= b;
        h *= 1099511628211ULL;
    }
    return splitmix64(h);
}

void xor_keystream(const KeyMaterial& key, std::uint64_t nonce, std::vector<std::uint8_t>& data) {
    std::uint64_t state = splitmix64(fold_key(key) ^ nonce);
    std::size_t i = 0;
    while (i < data.size()) {
        state = splitmix64(state);
        for (int j = 0; j < 8 && i < data.size(); ++j, ++i)
            data[i] ^= static_cast<std::uint8_t>((state >> (8 * j)) & 0xffULL);
    }
}

} // namespace

QkdResult qkd_establish(int node_a, int node_b, double eavesdrop_flip_rate, std::uint64_t seed,
                        double at_time, double abort_threshold) {
    if (eavesdrop_flip_rate < 0.0 || eavesdrop_flip_rate > 1.0)
        throw ValidationError("qkd_establish: flip rate must lie in [0, 1]");
    const std::uint64_t session =
        derive_seed(seed, SeedDomain::Qkd, static_cast<std::uint64_t>(std::min(node_a, node_b)),
                    static_cast<std::uint64_t>(std::max(node_a, node_b)));

    // The eavesdropper disturbs each sampled check bit independently; the
    // estimated error rate over the check sample drives the abort decision.
    Rng rng(session);
    std::size_t flipped = 0;
    for (std::size_t i = 0; i < kQkdCheckBits; ++i)
        if (rng.uniform01() < eavesdrop_flip_rate) ++flipped;
    QkdResult result;
    result.estimated_error_rate = static_cast<double>(flipped) / kQkdCheckBits;
    if (result.estimated_error_rate > abort_threshold) return result;

    KeyMaterial key;
    key.key_id = splitmix64(session ^ 0xa5a5a5a5a5a5a5a5ULL);
    key.established_at = at_time;
    std::uint64_t stream = splitmix64(session ^ 0x6b696579ULL); // both ends derive the same bytes
    for (std::size_t i = 0; i < key.bytes.size(); i += 8) {
        stream = splitmix64(stream);
        for (std::size_t j = 0; j < 8; ++j)
            key.bytes[i + j] = static_cast<std::uint8_t>((stream >> (8 * j)) & 0xffULL);
    }
    result.key = key;
    return result;
}

Envelope seal(const KeyMaterial& key, const std::vector<std::uint8_t>& payload,
              std::uint64_t nonce) {
    Envelope env;
    env.key_id = key.key_id;
    env.nonce = nonce;
    env.ciphertext = payload;
    xor_keystream(key, nonce, env.ciphertext);
    env.tag = tag_over(key, nonce, env.ciphertext);
    return env;
}

std::vector<std::uint8_t> open_envelope(const KeyMaterial& key, const Envelope& envelope) {
    if (envelope.key_id != key.key_id)
        throw AuthenticationError("envelope key id does not match");
    if (tag_over(key, envelope.nonce, envelope.ciphertext) != envelope.tag)
        throw AuthenticationError("envelope authentication tag mismatch");
    std::vector<std::uint8_t> plain = envelope.ciphertext;
    xor_keystream(key, envelope.nonce, plain);
    return plain;
}

std::vector<std::uint8_t> serialize_params(const fed::ParamVector& params) {
    std::vector<std::uint8_t> out(params.size() * sizeof(double));
    std::memcpy(out.data(), params.data(), out.size());
    return out;
}

fed::ParamVector deserialize_params(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() % sizeof(double) != 0)
        throw StructuralError("parameter byte payload has invalid length");
    fed::ParamVector out(bytes.size() / sizeof(double));
    std::memcpy(out.data(), bytes.data(), bytes.size());
    return out;
}

// ---- execution ---------------------------------------------------------------

ExecutionResult execute_schedule(const TransferSchedule& schedule, const VisibilityGraph& graph,
                                 const std::map<int, fed::ModelUpdate>& updates,
                                 const SecurityConfig& security) {
    ExecutionResult result;
    std::map<std::pair<int, int>, double> link_seconds;
    std::map<std::pair<int, int>, std::optional<KeyMaterial>> keys;

    const auto key_for_link = [&](int a, int b) -> std::optional<KeyMaterial>& {
        const auto key = link_key(a, b);
        auto it = keys.find(key);
        if (it == keys.end()) {
            QkdResult qkd = qkd_establish(a, b, security.eavesdrop_flip_rate, security.seed,
                                          schedule.round_start, security.abort_threshold);
            it = keys.emplace(key, std::move(qkd.key)).first;
        }
        return it->second;
    };

    // Live payload units per node, each a sorted set of origin ids.
    std::map<int, std::vector<std::vector<int>>> at_node;
    for (const auto& [id, update] : updates) {
        (void)update;
        at_node[id].push_back({id});
    }

    const auto take_live = [&](int node, const std::vector<int>& members) {
        // Union of live units at the node that intersect the planned member
        // set; tolerates upstream losses.
        std::vector<int> unit;
        auto& units = at_node[node];
        for (auto it = units.begin(); it != units.end();) {
            const bool overlaps = std::any_of(it->begin(), it->end(), [&](int m) {
                return std::find(members.begin(), members.end(), m) != members.end();
            });
            if (overlaps) {
                unit.insert(unit.end(), it->begin(), it->end());
                it = units.erase(it);
            } else {
                ++it;
            }
        }
        std::sort(unit.begin(), unit.end());
        return unit;
    };

    // Sample-weighted mean over a member set's original updates.
    const auto aggregate_members = [&](const std::vector<int>& members)
        -> std::optional<fed::ParamVector> {
        std::vector<fed::ModelUpdate> list;
        for (int m : members) {
            const auto it = updates.find(m);
            if (it != updates.end()) list.push_back(it->second);
        }
        if (list.empty()) return std::nullopt;
        return fed::fedavg(list);
    };

    std::set<int> arrived;
    for (const auto& event : schedule.events) {
        if (event.kind == EventKind::LocalAverage) {
            // Merge the live constituents into one unit at the node.
            const std::vector<int> unit = take_live(event.from, event.members);
            if (!unit.empty()) at_node[event.from].push_back(unit);
            continue;
        }
        if (event.kind == EventKind::GroundAggregate) {
            const std::vector<int> unit = take_live(event.from, event.members);
            arrived.insert(unit.begin(), unit.end());
            continue;
        }
        if (!event.completed) continue;
        const std::vector<int> unit = take_live(event.from, event.members);
        if (unit.empty()) continue; // lost upstream, nothing to send

        link_seconds[link_key(event.from, event.to)] += event.duration;
        result.total_seconds += event.duration;

        if (security.enabled) {
            auto& key = key_for_link(event.from, event.to);
            if (!key) {
                // QKD abort: the link is abandoned for the round.
                ++result.discarded_for_auth;
                continue;
            }
            const auto value = aggregate_members(unit);
            if (!value) continue;
            const std::uint64_t nonce =
                splitmix64(static_cast<std::uint64_t>(&event - schedule.events.data()) ^
                           security.seed);
            const Envelope env = seal(*key, serialize_params(*value), nonce);
            try {
                (void)open_envelope(*key, env);
            } catch (const AuthenticationError&) {
                ++result.discarded_for_auth;
                continue;
            }
        }
        at_node[event.to].push_back(unit);
    }

    // Sequential/simultaneous traces may leave arrivals implicit in the
    // ground node's unit list.
    for (int g : graph.ground_ids())
        for (const auto& unit : at_node[g]) arrived.insert(unit.begin(), unit.end());

    result.arrived.assign(arrived.begin(), arrived.end());
    for (const auto& [key, seconds] : link_seconds)
        result.per_link_seconds.push_back({key.first, key.second, seconds});

    if (!result.arrived.empty()) result.aggregated = aggregate_members(result.arrived);
    return result;
}

fed::RoundResult run_sat_round(std::vector<fed::Client>& clients, const fed::GlobalModel& global,
                               const VisibilityGraph& graph, const SatRoundOptions& options,
                               int local_epochs, std::uint64_t seed,
                               const fed::Evaluator& evaluate) {
    if (clients.empty()) throw ValidationError("run_sat_round: at least one client required");
    const RoleAssignment roles = roles_at(graph, options.round_start);

    const int round = global.version;
    const std::size_t len = global.params.size();
    fed::RoundRecord record;
    record.round = round;
    std::uint64_t values_exchanged = 0;

    std::map<int, fed::ModelUpdate> updates;
    for (auto& client : clients) {
        const auto it = roles.satellite_roles.find(client.id);
        if (it == roles.satellite_roles.end())
            throw ValidationError("client " + std::to_string(client.id) +
                                  " does not match any satellite in the trace");
        if (it->second == Role::NonParticipant) continue;

        client.local_params = global.params;
        values_exchanged += len;
        const std::uint64_t train_seed =
            derive_seed(seed, SeedDomain::ClientTrain, static_cast<std::uint64_t>(round),
                        static_cast<std::uint64_t>(client.id));
        const fed::LocalTrainOutcome outcome = client.train(client.local_params, local_epochs, train_seed);
        client.local_params = outcome.params;
        record.clients.push_back({client.id, outcome.loss, outcome.accuracy, client.n_samples});

        fed::ModelUpdate update;
        update.client_id = client.id;
        update.payload = outcome.params;
        update.n_samples = client.n_samples;
        update.reported_accuracy = outcome.accuracy;
        updates.emplace(client.id, std::move(update));
    }

    const std::uint64_t payload_bytes =
        options.payload_bytes != 0 ? options.payload_bytes : static_cast<std::uint64_t>(len) * 8;
    const TransferSchedule schedule = plan_transfers(graph, options.mode, options.round_start,
                                                     payload_bytes, options.security_overhead_s);
    const ExecutionResult exec = execute_schedule(schedule, graph, updates, options.security);

    fed::GlobalModel next = global;
    if (exec.aggregated) {
        next.params = *exec.aggregated;
        next.version += 1;
    }
    for (const auto& event : schedule.events)
        if (event.kind == EventKind::Transfer && event.completed) values_exchanged += len;

    record.global = evaluate(next.params);
    record.comm_seconds = exec.total_seconds;
    record.bytes_exchanged = values_exchanged * 8;
    return fed::RoundResult{std::move(next), std::move(record)};
}

} // namespace qfl::sat
