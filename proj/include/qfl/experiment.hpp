#ifndef QFL_EXPERIMENT_HPP
#define QFL_EXPERIMENT_HPP

#include <memory>
#include <string>

#include "qfl/config.hpp"
#include "qfl/dataset.hpp"
#include "qfl/fed.hpp"
#include "qfl/metrics.hpp"

namespace qfl::harness {

// A trainable binary classifier over a flat parameter vector. Scores are
// logits; prediction is score > 0.
class Model {
public:
    virtual ~Model() = default;
    virtual std::size_t param_count() const = 0;
    virtual fed::ParamVector init_params(std::uint64_t seed) const = 0;

    // Honors the configured shot count (seeded per sample) and noise.
    virtual double score(const fed::ParamVector& params, const Dataset& data,
                         std::size_t sample) const = 0;
    // Exact expectations regardless of the shot setting; used for training.
    virtual double analytic_score(const fed::ParamVector& params, const Dataset& data,
                                  std::size_t sample) const = 0;
    // Full parameter gradient scaled by dloss/dlogit. Analytic mode.
    virtual fed::ParamVector grad(const fed::ParamVector& params, const Dataset& data,
                                  std::size_t sample, double dloss_dlogit) const = 0;
};

std::unique_ptr<Model> build_model(const ModelConfig& config, const Dataset& shape,
                                   const qsim::NoiseSpec& noise,
                                   std::optional<std::size_t> shots, std::uint64_t seed);

// accuracy, recall on the positive class, rank-based AUC (absent for a
// single-class test set), and mean logistic loss.
Metrics evaluate_model(const Model& model, const fed::ParamVector& params, const Dataset& test);

// Per-sample SGD in seeded shuffled order; the returned loss/accuracy are
// measured on the shard after the final epoch.
fed::LocalTrainOutcome train_local(const Model& model, const Dataset& shard,
                                   fed::ParamVector params, int epochs, double learning_rate,
                                   std::uint64_t seed);

struct ExperimentResult {
    std::string results_path;
    std::string checkpoint_path; // final global parameters, one value per line
    fed::GlobalModel final_global;
    std::vector<fed::RoundRecord> history;
    Metrics final_metrics;
};

// Flat numeric checkpoint files: one parameter per line in shortest
// round-trip decimal form.
void save_params(const std::string& path, const fed::ParamVector& params);
fed::ParamVector load_params(const std::string& path);

// Runs the configured experiment end to end and writes one results file:
// a header line, one CSV row per (round, client), and a '# summary' JSON
// record. Fully deterministic per seed; rerunning a config yields a
// byte-identical file. The QFL_RESULTS_DIR environment variable overrides
// the default results directory.
ExperimentResult run_experiment(const ExperimentConfig& config);
ExperimentResult run_experiment(const ExperimentConfig& config, const std::string& results_dir);

// QLSTM vs. classical LSTM on the same synthetic sequence data under the
// same federated setup; outputs are reported, not asserted.
struct ComparisonConfig {
    std::size_t n = 300;
    int seq_len = 6;
    int n_clients = 5;
    int rounds = 10;
    int local_epochs = 1;
    double learning_rate = 0.4;
    int hidden_dim = 2;
    int n_qubits = 2;
    int n_layers = 1;
    std::uint64_t seed = 11;
};

struct ComparisonReport {
    Metrics qlstm;
    Metrics lstm;
    std::size_t qlstm_param_count = 0;
    std::size_t lstm_param_count = 0;
};

ComparisonReport run_qlstm_comparison(const ComparisonConfig& config);

// Shortest round-trip decimal form, shared by every results writer so reruns
// stay byte-identical.
std::string format_double(double value);

} // namespace qfl::harness

#endif
