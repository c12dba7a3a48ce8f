#include "qfl/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qfl/rng.hpp"

namespace qfl::harness {

namespace {

using nlohmann::json;

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
    throw ValidationError("config field '" + field + "': " + why);
}

ModelConfig parse_model(const json& j) {
    ModelConfig m;
    const std::string kind = j.value("kind", "vqc");
    if (kind == "vqc")
        m.kind = ModelKind::PureVqc;
    else if (kind == "hybrid")
        m.kind = ModelKind::Hybrid;
    else if (kind == "qlstm")
        m.kind = ModelKind::Qlstm;
    else
        bad_field("model.kind", "expected vqc, hybrid, or qlstm, got '" + kind + "'");
    m.n_qubits = j.value("n_qubits", m.n_qubits);
    m.n_layers = j.value("n_layers", m.n_layers);
    m.in_features = j.value("in_features", m.in_features);
    m.hidden_dim = j.value("hidden_dim", m.hidden_dim);
    return m;
}

DatasetConfig parse_dataset(const json& j) {
    DatasetConfig d;
    const std::string kind = j.value("kind", "blobs");
    if (kind == "blobs")
        d.kind = DatasetConfig::Kind::Blobs;
    else if (kind == "sequence")
        d.kind = DatasetConfig::Kind::Sequence;
    else if (kind == "csv")
        d.kind = DatasetConfig::Kind::Csv;
    else
        bad_field("dataset.kind", "expected blobs, sequence, or csv, got '" + kind + "'");
    d.n = j.value("n", d.n);
    d.synth.dims = j.value("dims", d.synth.dims);
    d.synth.separation = j.value("separation", d.synth.separation);
    d.synth.sigma = j.value("sigma", d.synth.sigma);
    d.synth.seq_len = j.value("seq_len", d.synth.seq_len);
    d.synth.omega = j.value("omega", d.synth.omega);
    d.synth.noise_sigma = j.value("noise_sigma", d.synth.noise_sigma);
    d.csv_path = j.value("path", d.csv_path);
    d.label_column = j.value("label_column", d.label_column);
    d.test_fraction = j.value("test_fraction", d.test_fraction);
    return d;
}

PartitionSpec parse_partition(const json& j) {
    PartitionSpec p;
    const std::string scheme = j.value("scheme", "iid");
    if (scheme == "iid")
        p.scheme = PartitionScheme::Iid;
    else if (scheme == "dirichlet")
        p.scheme = PartitionScheme::DirichletLabelSkew;
    else if (scheme == "long_tail")
        p.scheme = PartitionScheme::LongTail;
    else
        bad_field("partition.scheme", "expected iid, dirichlet, or long_tail, got '" + scheme + "'");
    p.n_clients = j.value("n_clients", p.n_clients);
    p.alpha = j.value("alpha", p.alpha);
    p.imbalance_ratio = j.value("imbalance_ratio", p.imbalance_ratio);
    return p;
}

fed::AggregationStrategy parse_aggregation(const json& j) {
    fed::AggregationStrategy a;
    const std::string kind = j.value("kind", "fedavg");
    if (kind == "fedavg")
        a.kind = fed::AggregationKind::FedAvg;
    else if (kind == "accuracy_weighted")
        a.kind = fed::AggregationKind::AccuracyWeighted;
    else if (kind == "sampled_merge")
        a.kind = fed::AggregationKind::SampledMerge;
    else
        bad_field("aggregation.kind",
                  "expected fedavg, accuracy_weighted, or sampled_merge, got '" + kind + "'");
    a.sample_fraction_up = j.value("sample_fraction_up", a.sample_fraction_up);
    a.sample_fraction_down = j.value("sample_fraction_down", a.sample_fraction_down);
    return a;
}

qsim::NoiseSpec parse_noise(const json& j) {
    qsim::NoiseSpec n;
    const std::string channel = j.value("channel", "none");
    if (channel == "none")
        n.channel = qsim::NoiseChannel::None;
    else if (channel == "depolarizing")
        n.channel = qsim::NoiseChannel::Depolarizing;
    else if (channel == "dephasing")
        n.channel = qsim::NoiseChannel::Dephasing;
    else
        bad_field("noise.channel", "expected none, depolarizing, or dephasing, got '" + channel + "'");
    n.p = j.value("p", n.p);
    return n;
}

SatschedConfig parse_satsched(const json& j) {
    SatschedConfig s;
    if (!j.contains("trace")) bad_field("satsched.trace", "trace file path is required");
    s.trace_path = j.at("trace").get<std::string>();
    const std::string mode = j.value("mode", "sequential");
    if (mode == "sequential")
        s.mode = sat::TransferMode::Sequential;
    else if (mode == "simultaneous")
        s.mode = sat::TransferMode::Simultaneous;
    else if (mode == "asynchronous")
        s.mode = sat::TransferMode::Asynchronous;
    else
        bad_field("satsched.mode",
                  "expected sequential, simultaneous, or asynchronous, got '" + mode + "'");
    s.round_start = j.value("round_start", s.round_start);
    s.round_period = j.value("round_period", s.round_period);
    s.payload_bytes = j.value("payload_bytes", s.payload_bytes);
    s.security_overhead_s = j.value("security_overhead_s", s.security_overhead_s);
    s.secure = j.value("secure", s.secure);
    s.eavesdrop_flip_rate = j.value("eavesdrop_flip_rate", s.eavesdrop_flip_rate);
    s.qkd_abort_threshold = j.value("qkd_abort_threshold", s.qkd_abort_threshold);
    return s;
}

ExperimentConfig parse_config_fields(const json& j) {
    ExperimentConfig cfg;
    cfg.name = j.value("name", cfg.name);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.rounds = j.value("rounds", cfg.rounds);
    cfg.local_epochs = j.value("local_epochs", cfg.local_epochs);
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    if (j.contains("model")) cfg.model = parse_model(j.at("model"));
    if (j.contains("dataset")) cfg.dataset = parse_dataset(j.at("dataset"));
    if (j.contains("partition")) cfg.partition = parse_partition(j.at("partition"));
    if (j.contains("aggregation")) cfg.aggregation = parse_aggregation(j.at("aggregation"));
    if (j.contains("noise")) cfg.noise = parse_noise(j.at("noise"));
    if (j.contains("shots") && !j.at("shots").is_null())
        cfg.shots = j.at("shots").get<std::size_t>();
    if (j.contains("satsched")) cfg.satsched = parse_satsched(j.at("satsched"));

    if (j.contains("topology")) {
        const json& t = j.at("topology");
        const std::string kind = t.value("kind", "centralized");
        if (kind == "centralized") {
            cfg.topology = topology::TopologyKind::Centralized;
        } else if (kind == "hierarchical") {
            cfg.topology = topology::TopologyKind::Hierarchical;
            if (t.contains("clusters")) {
                const auto clusters = t.at("clusters").get<std::vector<int>>();
                for (std::size_t i = 0; i < clusters.size(); ++i)
                    cfg.cluster_of[static_cast<int>(i)] = clusters[i];
            }
        } else if (kind == "chained") {
            cfg.topology = topology::TopologyKind::Chained;
            if (t.contains("order")) cfg.chain_order = t.at("order").get<std::vector<int>>();
        } else {
            bad_field("topology.kind",
                      "expected centralized, hierarchical, or chained, got '" + kind + "'");
        }
    }

    cfg.partition.seed = derive_seed(cfg.seed, SeedDomain::Partition);
    cfg.validate();
    return cfg;
}

} // namespace

void ExperimentConfig::validate() const {
    if (rounds < 0) throw ValidationError("config field 'rounds': must be >= 0");
    if (local_epochs < 0) throw ValidationError("config field 'local_epochs': must be >= 0");
    if (!(learning_rate >= 0.0)) throw ValidationError("config field 'learning_rate': must be >= 0");
    if (model.n_qubits < 1 || model.n_qubits > qsim::kMaxQubits)
        throw ValidationError("config field 'model.n_qubits': out of range");
    if (model.n_layers < 0) throw ValidationError("config field 'model.n_layers': must be >= 0");
    if (model.kind == ModelKind::Qlstm && dataset.kind != DatasetConfig::Kind::Sequence)
        throw ValidationError("config field 'model.kind': qlstm requires a sequence dataset");
    if (model.kind != ModelKind::Qlstm && dataset.kind == DatasetConfig::Kind::Sequence)
        throw ValidationError("config field 'dataset.kind': sequence data requires the qlstm model");
    if (dataset.kind == DatasetConfig::Kind::Csv && dataset.csv_path.empty())
        throw ValidationError("config field 'dataset.path': required for csv datasets");
    if (dataset.kind == DatasetConfig::Kind::Csv && dataset.label_column.empty())
        throw ValidationError("config field 'dataset.label_column': required for csv datasets");
    if (!(dataset.test_fraction > 0.0 && dataset.test_fraction < 1.0))
        throw ValidationError("config field 'dataset.test_fraction': must lie in (0, 1)");
    partition.validate();
    aggregation.validate();
    noise.validate();
    if (shots && *shots == 0)
        throw ValidationError("config field 'shots': must be >= 1 when present");
    if (satsched && topology != topology::TopologyKind::Centralized)
        throw ValidationError("config field 'satsched': requires centralized topology");
    if (satsched && aggregation.kind != fed::AggregationKind::FedAvg)
        throw ValidationError("config field 'satsched': ground aggregation is fedavg");
    if (topology == topology::TopologyKind::Hierarchical && cluster_of.empty())
        throw ValidationError("config field 'topology.clusters': required for hierarchical");
    if (topology == topology::TopologyKind::Chained && chain_order.empty())
        throw ValidationError("config field 'topology.order': required for chained");
}

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
    try {
        return parse_config_fields(j);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config field has the wrong type: ") + e.what());
    }
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

} // namespace qfl::harness
