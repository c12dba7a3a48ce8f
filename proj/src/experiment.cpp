#include "qfl/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "qfl/losses.hpp"
#include "qfl/rng.hpp"
#include "qfl/vqc.hpp"

namespace qfl::harness {

namespace {

using fed::ParamVector;

class PureVqcModel final : public Model {
public:
    PureVqcModel(vqc::VqcSpec spec, qsim::NoiseSpec noise, std::optional<std::size_t> shots,
                 std::uint64_t shot_seed_root)
        : spec_(spec), noise_(noise), shots_(shots), shot_seed_root_(shot_seed_root) {}

    std::size_t param_count() const override { return spec_.param_count(); }

    ParamVector init_params(std::uint64_t seed) const override {
        return vqc::random_init(spec_.param_count(), seed);
    }

    double score(const ParamVector& params, const Dataset& data,
                 std::size_t sample) const override {
        vqc::ForwardOptions options;
        options.noise = noise_;
        if (shots_) {
            options.shots = shots_;
            options.seed = splitmix64(shot_seed_root_ ^ sample);
        }
        return mean_z(vqc::vqc_forward(spec_, params, data.rows[sample], options));
    }

    double analytic_score(const ParamVector& params, const Dataset& data,
                          std::size_t sample) const override {
        vqc::ForwardOptions options;
        options.noise = noise_;
        return mean_z(vqc::vqc_forward(spec_, params, data.rows[sample], options));
    }

    ParamVector grad(const ParamVector& params, const Dataset& data, std::size_t sample,
                     double dloss_dlogit) const override {
        // logit = mean of noisy Z expectations, so each qubit carries weight
        // (1-p)/n through the chain rule.
        const double noise_scale = qsim::apply_noise({1.0}, noise_)[0];
        const double w = dloss_dlogit * noise_scale / static_cast<double>(spec_.n_qubits);
        const std::vector<double> weights(spec_.n_qubits, w);
        return vqc::parameter_shift_grad(spec_, params, data.rows[sample], weights);
    }

private:
    static double mean_z(const std::vector<double>& z) {
        double total = 0.0;
        for (double v : z) total += v;
        return total / static_cast<double>(z.size());
    }

    vqc::VqcSpec spec_;
    qsim::NoiseSpec noise_;
    std::optional<std::size_t> shots_;
    std::uint64_t shot_seed_root_;
};

class HybridModel final : public Model {
public:
    HybridModel(hybrid::HybridSpec spec, qsim::NoiseSpec noise, std::optional<std::size_t> shots,
                std::uint64_t shot_seed_root)
        : spec_(spec), noise_(noise), shots_(shots), shot_seed_root_(shot_seed_root) {}

    std::size_t param_count() const override { return spec_.param_count(); }

    ParamVector init_params(std::uint64_t seed) const override {
        return hybrid::hybrid_init(spec_, seed);
    }

    double score(const ParamVector& params, const Dataset& data,
                 std::size_t sample) const override {
        vqc::ForwardOptions options;
        options.noise = noise_;
        if (shots_) {
            options.shots = shots_;
            options.seed = splitmix64(shot_seed_root_ ^ sample);
        }
        return hybrid::hybrid_forward(spec_, params, data.rows[sample], options)[0];
    }

    double analytic_score(const ParamVector& params, const Dataset& data,
                          std::size_t sample) const override {
        vqc::ForwardOptions options;
        options.noise = noise_;
        return hybrid::hybrid_forward(spec_, params, data.rows[sample], options)[0];
    }

    ParamVector grad(const ParamVector& params, const Dataset& data, std::size_t sample,
                     double dloss_dlogit) const override {
        vqc::ForwardOptions options;
        options.noise = noise_;
        return hybrid::hybrid_backward(spec_, params, data.rows[sample], {dloss_dlogit}, options);
    }

private:
    hybrid::HybridSpec spec_;
    qsim::NoiseSpec noise_;
    std::optional<std::size_t> shots_;
    std::uint64_t shot_seed_root_;
};

class QlstmModel final : public Model {
public:
    explicit QlstmModel(qlstm::QlstmSpec spec) : spec_(spec) {}

    std::size_t param_count() const override { return spec_.param_count(); }

    ParamVector init_params(std::uint64_t seed) const override {
        return qlstm::qlstm_init(spec_, seed);
    }

    double score(const ParamVector& params, const Dataset& data,
                 std::size_t sample) const override {
        return qlstm::qlstm_forward(spec_, params, data.sample_rows(sample))[0];
    }

    double analytic_score(const ParamVector& params, const Dataset& data,
                          std::size_t sample) const override {
        return score(params, data, sample);
    }

    ParamVector grad(const ParamVector& params, const Dataset& data, std::size_t sample,
                     double dloss_dlogit) const override {
        return qlstm::qlstm_backward(spec_, params, data.sample_rows(sample), {dloss_dlogit});
    }

private:
    qlstm::QlstmSpec spec_;
};

// Classical LSTM wrapped in the same interface for the comparison script.
class LstmModel final : public Model {
public:
    explicit LstmModel(qlstm::ClassicalLstmSpec spec) : spec_(spec) {}

    std::size_t param_count() const override { return spec_.param_count(); }

    ParamVector init_params(std::uint64_t seed) const override {
        return qlstm::lstm_init(spec_, seed);
    }

    double score(const ParamVector& params, const Dataset& data,
                 std::size_t sample) const override {
        return qlstm::lstm_forward(spec_, params, data.sample_rows(sample))[0];
    }

    double analytic_score(const ParamVector& params, const Dataset& data,
                          std::size_t sample) const override {
        return score(params, data, sample);
    }

    ParamVector grad(const ParamVector& params, const Dataset& data, std::size_t sample,
                     double dloss_dlogit) const override {
        return qlstm::lstm_backward(spec_, params, data.sample_rows(sample), {dloss_dlogit});
    }

private:
    qlstm::ClassicalLstmSpec spec_;
};

std::vector<fed::Client> make_clients(const std::vector<Dataset>& shards, const Model& model,
                                      double learning_rate, const std::vector<int>& ids) {
    std::vector<fed::Client> clients;
    for (std::size_t i = 0; i < shards.size(); ++i) {
        fed::Client client;
        client.id = ids[i];
        client.n_samples = shards[i].n_samples();
        const Dataset* shard = &shards[i];
        const Model* m = &model;
        client.train = [m, shard, learning_rate](const ParamVector& start, int epochs,
                                                 std::uint64_t seed) {
            return train_local(*m, *shard, start, epochs, learning_rate, seed);
        };
        clients.push_back(std::move(client));
    }
    return clients;
}

std::string results_dir_from_env() {
    if (const char* dir = std::getenv("QFL_RESULTS_DIR")) return dir;
    return "results";
}

} // namespace

std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) throw StructuralError("format_double failed");
    return std::string(buf, ptr);
}

void save_params(const std::string& path, const fed::ParamVector& params) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write checkpoint file: " + path);
    for (double v : params) out << format_double(v) << '\n';
}

fed::ParamVector load_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open checkpoint file: " + path);
    fed::ParamVector params;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), value);
        if (ec != std::errc() || ptr != line.data() + line.size())
            throw ValidationError("checkpoint file has a non-numeric line: " + line);
        params.push_back(value);
    }
    return params;
}

std::unique_ptr<Model> build_model(const ModelConfig& config, const Dataset& shape,
                                   const qsim::NoiseSpec& noise,
                                   std::optional<std::size_t> shots, std::uint64_t seed) {
    const std::uint64_t shot_root = derive_seed(seed, SeedDomain::Shots);
    switch (config.kind) {
        case ModelKind::PureVqc: {
            if (shape.n_features() != static_cast<std::size_t>(config.n_qubits))
                throw ValidationError(
                    "config field 'model.n_qubits': pure VQC needs one feature per qubit (dataset "
                    "has " + std::to_string(shape.n_features()) + " features)");
            vqc::VqcSpec spec{config.n_qubits, config.n_layers};
            return std::make_unique<PureVqcModel>(spec, noise, shots, shot_root);
        }
        case ModelKind::Hybrid: {
            hybrid::HybridSpec spec;
            spec.in_features = config.in_features ? config.in_features : shape.n_features();
            if (spec.in_features != shape.n_features())
                throw ValidationError("config field 'model.in_features': does not match dataset");
            spec.vqc = vqc::VqcSpec{config.n_qubits, config.n_layers};
            spec.n_classes = 1;
            return std::make_unique<HybridModel>(spec, noise, shots, shot_root);
        }
        case ModelKind::Qlstm: {
            if (noise.channel != qsim::NoiseChannel::None)
                throw ValidationError("config field 'noise': not supported for qlstm models");
            if (shots)
                throw ValidationError("config field 'shots': not supported for qlstm models");
            qlstm::QlstmSpec spec;
            spec.input_dim = static_cast<int>(shape.n_features());
            spec.hidden_dim = config.hidden_dim;
            spec.seq_len = shape.seq_len;
            spec.gate_vqc = vqc::VqcSpec{config.n_qubits, config.n_layers};
            spec.output_dim = 1;
            return std::make_unique<QlstmModel>(spec);
        }
    }
    throw StructuralError("unknown model kind");
}

Metrics evaluate_model(const Model& model, const ParamVector& params, const Dataset& test) {
    if (test.n_samples() == 0) throw ValidationError("evaluate_model: empty test set");
    std::vector<double> scores(test.n_samples());
    for (std::size_t s = 0; s < test.n_samples(); ++s) scores[s] = model.score(params, test, s);
    return evaluate_binary(scores, test.labels);
}

fed::LocalTrainOutcome train_local(const Model& model, const Dataset& shard, ParamVector params,
                                   int epochs, double learning_rate, std::uint64_t seed) {
    const std::size_t n = shard.n_samples();
    if (n == 0) throw ValidationError("train_local: empty shard");
    Rng rng(seed);
    for (int epoch = 0; epoch < epochs; ++epoch) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(order);
        for (std::size_t s : order) {
            const double logit = model.analytic_score(params, shard, s);
            const auto lg = losses::logistic_loss(logit, shard.labels[s]);
            const ParamVector g = model.grad(params, shard, s, lg.dlogit);
            params = vqc::sgd_step(params, g, learning_rate);
        }
    }

    fed::LocalTrainOutcome outcome;
    std::size_t correct = 0;
    double loss_sum = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
        const double logit = model.analytic_score(params, shard, s);
        loss_sum += losses::logistic_loss(logit, shard.labels[s]).loss;
        if ((logit > 0.0 ? 1 : 0) == shard.labels[s]) ++correct;
    }
    outcome.loss = loss_sum / static_cast<double>(n);
    outcome.accuracy = static_cast<double>(correct) / static_cast<double>(n);
    outcome.params = std::move(params);
    return outcome;
}

namespace {

void write_results_file(const std::string& path, const ExperimentConfig& cfg,
                        const std::vector<fed::RoundRecord>& history,
                        const Metrics& final_metrics) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write results file: " + path);
    out << "round,client_id,train_loss,train_accuracy,n_samples,global_loss,global_accuracy,"
           "global_recall,global_auc,comm_seconds,bytes_exchanged\n";
    double total_comm = 0.0;
    std::uint64_t total_bytes = 0;
    for (const auto& record : history) {
        total_comm += record.comm_seconds;
        total_bytes += record.bytes_exchanged;
        for (const auto& client : record.clients) {
            out << record.round << ',' << client.client_id << ','
                << format_double(client.train_loss) << ',' << format_double(client.train_accuracy)
                << ',' << client.n_samples << ',' << format_double(record.global.loss) << ','
                << format_double(record.global.accuracy) << ','
                << format_double(record.global.recall) << ','
                << (record.global.auc ? format_double(*record.global.auc) : std::string()) << ','
                << format_double(record.comm_seconds) << ',' << record.bytes_exchanged << '\n';
        }
    }

    nlohmann::json summary;
    summary["name"] = cfg.name;
    summary["seed"] = cfg.seed;
    summary["rounds_completed"] = history.size();
    summary["final_accuracy"] = final_metrics.accuracy;
    summary["final_recall"] = final_metrics.recall;
    if (final_metrics.auc) summary["final_auc"] = *final_metrics.auc;
    summary["final_loss"] = final_metrics.loss;
    summary["total_comm_seconds"] = total_comm;
    summary["total_bytes_exchanged"] = total_bytes;
    out << "# summary " << summary.dump() << '\n';
}

} // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
    return run_experiment(config, results_dir_from_env());
}

ExperimentResult run_experiment(const ExperimentConfig& config, const std::string& results_dir) {
    config.validate();

    // Data.
    Dataset full;
    const std::uint64_t data_seed = derive_seed(config.seed, SeedDomain::DatasetGen);
    switch (config.dataset.kind) {
        case DatasetConfig::Kind::Blobs:
            full = synth_dataset(SynthKind::Blobs, config.dataset.n, data_seed,
                                 config.dataset.synth);
            break;
        case DatasetConfig::Kind::Sequence:
            full = synth_dataset(SynthKind::Sequence, config.dataset.n, data_seed,
                                 config.dataset.synth);
            break;
        case DatasetConfig::Kind::Csv:
            full = load_csv_dataset(config.dataset.csv_path, config.dataset.label_column);
            break;
    }
    const SplitDataset split = train_test_split(
        full, config.dataset.test_fraction, derive_seed(config.seed, SeedDomain::TrainTestSplit));

    PartitionSpec pspec = config.partition;
    pspec.seed = derive_seed(config.seed, SeedDomain::Partition);
    const std::vector<Dataset> shards = partition_dataset(split.train, pspec);

    // Model and federation.
    const std::unique_ptr<Model> model =
        build_model(config.model, split.train, config.noise, config.shots, config.seed);
    fed::GlobalModel initial;
    initial.params = model->init_params(derive_seed(config.seed, SeedDomain::ParamInit));
    initial.version = 0;

    const fed::Evaluator evaluator = [&](const ParamVector& params) {
        return evaluate_model(*model, params, split.test);
    };

    std::vector<int> client_ids(shards.size());
    std::iota(client_ids.begin(), client_ids.end(), 0);

    ExperimentResult result;
    if (config.satsched) {
        const sat::VisibilityGraph graph = sat::VisibilityGraph::load_trace(
            config.satsched->trace_path);
        const auto sat_ids = graph.satellite_ids();
        if (sat_ids.size() != shards.size())
            throw ValidationError("config field 'partition.n_clients': must equal the trace's "
                                  "satellite count (" + std::to_string(sat_ids.size()) + ")");
        client_ids = sat_ids;
        std::vector<fed::Client> clients =
            make_clients(shards, *model, config.learning_rate, client_ids);
        for (auto& c : clients) c.local_params = initial.params;

        sat::SatRoundOptions options;
        options.mode = config.satsched->mode;
        options.payload_bytes = config.satsched->payload_bytes;
        options.security_overhead_s = config.satsched->security_overhead_s;
        options.security.enabled = config.satsched->secure;
        options.security.eavesdrop_flip_rate = config.satsched->eavesdrop_flip_rate;
        options.security.abort_threshold = config.satsched->qkd_abort_threshold;
        options.security.seed = derive_seed(config.seed, SeedDomain::Qkd);

        fed::GlobalModel global = initial;
        for (int r = 0; r < config.rounds; ++r) {
            options.round_start =
                config.satsched->round_start + r * config.satsched->round_period;
            fed::RoundResult round = sat::run_sat_round(clients, global, graph, options,
                                                        config.local_epochs, config.seed,
                                                        evaluator);
            global = std::move(round.global);
            result.history.push_back(std::move(round.record));
        }
        result.final_global = std::move(global);
    } else {
        std::vector<fed::Client> clients =
            make_clients(shards, *model, config.learning_rate, client_ids);
        topology::TopologyConfig topo;
        topo.kind = config.topology;
        topo.rounds = config.rounds;
        topo.cluster_of = config.cluster_of;
        topo.chain_order = config.chain_order;

        topology::RunResult run;
        switch (config.topology) {
            case topology::TopologyKind::Centralized:
                run = topology::run_centralized(clients, initial, topo, config.aggregation,
                                                config.local_epochs, config.seed, evaluator);
                break;
            case topology::TopologyKind::Hierarchical:
                run = topology::run_hierarchical(clients, initial, topo, config.aggregation,
                                                 config.local_epochs, config.seed, evaluator);
                break;
            case topology::TopologyKind::Chained:
                run = topology::run_chained(clients, initial, topo, config.local_epochs,
                                            config.seed, evaluator);
                break;
        }
        result.final_global = std::move(run.global);
        result.history = std::move(run.history);
    }

    result.final_metrics = evaluator(result.final_global.params);

    std::filesystem::create_directories(results_dir);
    const std::string stem = config.name + "_seed" + std::to_string(config.seed);
    result.results_path = (std::filesystem::path(results_dir) / (stem + ".csv")).string();
    write_results_file(result.results_path, config, result.history, result.final_metrics);
    result.checkpoint_path =
        (std::filesystem::path(results_dir) / (stem + ".params")).string();
    save_params(result.checkpoint_path, result.final_global.params);
    return result;
}

ComparisonReport run_qlstm_comparison(const ComparisonConfig& config) {
    SynthOptions synth;
    synth.seq_len = config.seq_len;
    const Dataset full = synth_dataset(SynthKind::Sequence, config.n,
                                       derive_seed(config.seed, SeedDomain::DatasetGen), synth);
    const SplitDataset split =
        train_test_split(full, 0.2, derive_seed(config.seed, SeedDomain::TrainTestSplit));
    PartitionSpec pspec;
    pspec.scheme = PartitionScheme::Iid;
    pspec.n_clients = config.n_clients;
    pspec.seed = derive_seed(config.seed, SeedDomain::Partition);
    const std::vector<Dataset> shards = partition_dataset(split.train, pspec);

    std::vector<int> ids(shards.size());
    std::iota(ids.begin(), ids.end(), 0);

    const auto federate = [&](const Model& model) {
        std::vector<fed::Client> clients = make_clients(shards, model, config.learning_rate, ids);
        fed::GlobalModel initial;
        initial.params = model.init_params(derive_seed(config.seed, SeedDomain::ParamInit));
        const fed::Evaluator evaluator = [&](const ParamVector& params) {
            return evaluate_model(model, params, split.test);
        };
        topology::TopologyConfig topo;
        topo.kind = topology::TopologyKind::Centralized;
        topo.rounds = config.rounds;
        const topology::RunResult run =
            topology::run_centralized(clients, initial, topo, fed::AggregationStrategy{},
                                      config.local_epochs, config.seed, evaluator);
        return evaluator(run.global.params);
    };

    qlstm::QlstmSpec qspec;
    qspec.input_dim = static_cast<int>(split.train.n_features());
    qspec.hidden_dim = config.hidden_dim;
    qspec.seq_len = split.train.seq_len;
    qspec.gate_vqc = vqc::VqcSpec{config.n_qubits, config.n_layers};
    const QlstmModel qmodel(qspec);

    qlstm::ClassicalLstmSpec lspec;
    lspec.input_dim = qspec.input_dim;
    lspec.hidden_dim = config.hidden_dim;
    lspec.seq_len = qspec.seq_len;
    const LstmModel lmodel(lspec);

    ComparisonReport report;
    report.qlstm = federate(qmodel);
    report.lstm = federate(lmodel);
    report.qlstm_param_count = qmodel.param_count();
    report.lstm_param_count = lmodel.param_count();
    return report;
}

} // namespace qfl::harness
