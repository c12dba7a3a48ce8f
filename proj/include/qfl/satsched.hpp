#ifndef QFL_SATSCHED_HPP
#define QFL_SATSCHED_HPP

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qfl/fed.hpp"

namespace qfl::sat {

enum class NodeKind { Satellite, Ground };

struct NodeInfo {
    int id = 0;
    std::string name;
    NodeKind kind = NodeKind::Satellite;
};

// One line-of-sight contact window between a node pair, with the link's data
// rate. Windows for the same pair are merged at load so they never overlap.
struct Window {
    int node_a = 0;
    int node_b = 0;
    double open = 0.0;
    double close = 0.0;
    double rate_bytes_per_sec = 0.0;
};

class VisibilityGraph {
public:
    VisibilityGraph(std::vector<NodeInfo> nodes, std::vector<Window> windows);

    // Trace format, one record per line:
    //   node <name> satellite|ground
    //   window <name_a> <name_b> <open_s> <close_s> <rate_bytes_per_s>
    // '#' starts a comment. Names used only in window records default to
    // satellites.
    static VisibilityGraph load_trace(const std::string& path);
    static VisibilityGraph parse_trace(const std::string& text);

    const std::vector<NodeInfo>& nodes() const { return nodes_; }
    const std::vector<Window>& windows() const { return windows_; }
    bool is_ground(int id) const;
    std::vector<int> satellite_ids() const;
    std::vector<int> ground_ids() const;
    int id_of(const std::string& name) const;

    double span_begin() const { return span_begin_; }
    double span_end() const { return span_end_; }

    // Window containing t on the (a, b) link, if any (open <= t < close).
    std::optional<Window> open_at(int a, int b, double t) const;
    std::vector<int> neighbors_open(int id, double t) const;

    struct Fit {
        double start = 0.0;
        double duration = 0.0;
        double window_close = 0.0;
    };

    // Earliest window on (a, b) in which a transfer of payload_bytes fits
    // when it cannot start before ready: duration = bytes / window rate +
    // overhead, start = max(open, ready), start + duration <= close.
    // Searches every window from ready onward.
    std::optional<Fit> earliest_fit(int a, int b, double ready, double payload_bytes,
                                    double overhead_s) const;

private:
    std::vector<NodeInfo> nodes_;
    std::vector<Window> windows_; // sorted by (min pair, open)
    double span_begin_ = 0.0;
    double span_end_ = 0.0;
};

enum class Role { Primary, Secondary, NonParticipant };

struct RoleAssignment {
    double t = 0.0;
    std::map<int, Role> satellite_roles;
};

// Primary: an open direct satellite-ground window at t. Secondary: no direct
// window but a feasible multi-hop satellite path (breadth-first over edges
// open at t) to a primary. Everyone else sits the round out.
RoleAssignment roles_at(const VisibilityGraph& graph, double t);

enum class TransferMode { Sequential, Simultaneous, Asynchronous };

enum class EventKind { Transfer, LocalAverage, GroundAggregate };

struct TransferEvent {
    EventKind kind = EventKind::Transfer;
    double send_time = 0.0; // transmission start; aggregation stamp for non-transfers
    int from = 0;
    int to = 0;
    std::vector<int> members; // origin satellite ids carried by this payload
    double duration = 0.0;
    bool completed = false;
    double complete_time = 0.0;  // send_time + duration
    double available_time = 0.0; // when the receiver may act on the payload
};

struct TransferSchedule {
    TransferMode mode = TransferMode::Sequential;
    double round_start = 0.0;
    std::vector<TransferEvent> events; // time-ordered
};

// Builds the event timeline for one round starting at t.
//
// Shared rules: every participant holds one update of payload_bytes; a hop
// lasts payload_bytes / rate + security_overhead_s and must fit entirely
// inside a window (earliest_fit above; a payload that fits no window is
// marked failed and excluded). Relay routes are fewest-hops at time t, ties
// broken by lowest node id.
//
// sequential    one transmission at a time on a global timeline: each
//               secondary's update is relayed hop-by-hop to a primary and
//               straight on to ground, then every primary uplinks its own
//               update, all in ascending node-id order.
// simultaneous  the chains run concurrently (per-chain timelines, no link
//               contention); each chain ends at the secondary's nearest
//               primary, which locally averages everything received plus its
//               own update before a single uplink.
// asynchronous  every node forwards held payloads to its parent on the next
//               window that fits; payloads received during one window merge
//               and become available at window close, where the aggregation
//               event is stamped.
TransferSchedule plan_transfers(const VisibilityGraph& graph, TransferMode mode, double t,
                                std::uint64_t payload_bytes, double security_overhead_s = 0.05);

// -- simulated QKD and authenticated envelopes -------------------------------

struct KeyMaterial {
    std::uint64_t key_id = 0;
    std::array<std::uint8_t, 32> bytes{};
    double established_at = 0.0;
};

struct QkdResult {
    std::optional<KeyMaterial> key; // absent on abort
    double estimated_error_rate = 0.0;
    bool aborted() const { return !key.has_value(); }
};

inline constexpr double kQkdAbortThreshold = 0.11;

// Simulated raw-key exchange: an eavesdropper flips the given fraction of
// sampled check bits; sessions whose estimated error rate exceeds the abort
// threshold are abandoned. On success both endpoints hold identical key
// bytes (a keyed pseudorandom expansion of the link seed).
QkdResult qkd_establish(int node_a, int node_b, double eavesdrop_flip_rate, std::uint64_t seed,
                        double at_time = 0.0, double abort_threshold = kQkdAbortThreshold);

struct Envelope {
    std::uint64_t key_id = 0;
    std::uint64_t nonce = 0;
    std::vector<std::uint8_t> ciphertext;
    std::uint64_t tag = 0;
};

// Keyed-stream XOR plus a keyed tag over (nonce, ciphertext) — a
// simulation-grade authenticated-encryption stand-in, not a certified
// cipher. open_envelope throws AuthenticationError on any mismatch.
Envelope seal(const KeyMaterial& key, const std::vector<std::uint8_t>& payload,
              std::uint64_t nonce);
std::vector<std::uint8_t> open_envelope(const KeyMaterial& key, const Envelope& envelope);

std::vector<std::uint8_t> serialize_params(const fed::ParamVector& params);
fed::ParamVector deserialize_params(const std::vector<std::uint8_t>& bytes);

// -- execution ----------------------------------------------------------------

struct SecurityConfig {
    bool enabled = false;
    double eavesdrop_flip_rate = 0.0;
    double abort_threshold = kQkdAbortThreshold;
    std::uint64_t seed = 0;
};

struct LinkSeconds {
    int node_a = 0;
    int node_b = 0;
    double seconds = 0.0;
};

struct ExecutionResult {
    std::vector<int> arrived; // origin satellite ids whose updates reached ground
    std::vector<LinkSeconds> per_link_seconds;
    double total_seconds = 0.0; // sum over executed transfer events
    std::optional<fed::ParamVector> aggregated; // sample-weighted mean of arrivals
    std::size_t discarded_for_auth = 0; // tampered or keyless transfers dropped
};

// Walks the schedule with the actual updates: seals and opens envelopes per
// hop when security is enabled (a QKD abort kills the link for the round),
// performs the local-average and ground aggregation steps, and accounts
// communication time per link. Non-arrival is an outcome, never an error.
ExecutionResult execute_schedule(const TransferSchedule& schedule, const VisibilityGraph& graph,
                                 const std::map<int, fed::ModelUpdate>& updates,
                                 const SecurityConfig& security = {});

// -- one federated round over the constellation -------------------------------

struct SatRoundOptions {
    TransferMode mode = TransferMode::Sequential;
    double round_start = 0.0;
    std::uint64_t payload_bytes = 0; // 0 = 8 bytes per model parameter
    double security_overhead_s = 0.05;
    SecurityConfig security;
};

// Clients are matched to satellites by id. Participants train, updates move
// per the schedule, and the ground station aggregates exactly the arrived
// set with sample-weighted FedAvg.
fed::RoundResult run_sat_round(std::vector<fed::Client>& clients, const fed::GlobalModel& global,
                               const VisibilityGraph& graph, const SatRoundOptions& options,
                               int local_epochs, std::uint64_t seed,
                               const fed::Evaluator& evaluate);

} // namespace qfl::sat

#endif
