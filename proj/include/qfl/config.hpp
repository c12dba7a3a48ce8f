#ifndef QFL_CONFIG_HPP
#define QFL_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>

#include "qfl/dataset.hpp"
#include "qfl/fed.hpp"
#include "qfl/hybrid.hpp"
#include "qfl/qlstm.hpp"
#include "qfl/satsched.hpp"
#include "qfl/topology.hpp"

namespace qfl::harness {

enum class ModelKind { PureVqc, Hybrid, Qlstm };

struct ModelConfig {
    ModelKind kind = ModelKind::PureVqc;
    int n_qubits = 4;
    int n_layers = 2;
    // hybrid only
    std::size_t in_features = 0; // 0 = take from the dataset
    // qlstm only
    int hidden_dim = 2;
};

struct DatasetConfig {
    enum class Kind { Blobs, Sequence, Csv };
    Kind kind = Kind::Blobs;
    std::size_t n = 600;
    SynthOptions synth;
    std::string csv_path;
    std::string label_column;
    double test_fraction = 0.2;
};

struct SatschedConfig {
    std::string trace_path;
    sat::TransferMode mode = sat::TransferMode::Sequential;
    double round_start = 0.0;
    double round_period = 0.0; // round r starts at round_start + r * period
    std::uint64_t payload_bytes = 0;
    double security_overhead_s = 0.05;
    bool secure = false;
    double eavesdrop_flip_rate = 0.0;
    double qkd_abort_threshold = sat::kQkdAbortThreshold;
};

struct ExperimentConfig {
    std::string name = "experiment";
    std::uint64_t seed = 0;
    int rounds = 1;
    int local_epochs = 1;
    double learning_rate = 0.1;

    ModelConfig model;
    DatasetConfig dataset;
    PartitionSpec partition; // seed filled from the experiment seed
    fed::AggregationStrategy aggregation;
    topology::TopologyKind topology = topology::TopologyKind::Centralized;
    std::map<int, int> cluster_of;     // hierarchical
    std::vector<int> chain_order;      // chained
    qsim::NoiseSpec noise;
    std::optional<std::size_t> shots;
    std::optional<SatschedConfig> satsched;

    // Throws ValidationError naming the offending field.
    void validate() const;
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

} // namespace qfl::harness

#endif
