#include <cstdint>
#include <iostream>
#include <vector>

#include <CLI11.hpp>

#include "qfl/experiment.hpp"
#include "qfl/qsim.hpp"
#include "qfl/rng.hpp"
#include "qfl/vqc.hpp"

namespace {

using namespace qfl;

int cmd_run(const std::string& config_path) {
    const harness::ExperimentConfig config = harness::load_config(config_path);
    const harness::ExperimentResult result = harness::run_experiment(config);
    std::cout << "results: " << result.results_path << "\n";
    std::cout << "checkpoint: " << result.checkpoint_path << "\n";
    std::cout << "rounds: " << result.history.size() << "\n";
    std::cout << "final accuracy: " << harness::format_double(result.final_metrics.accuracy)
              << "\n";
    std::cout << "final recall:   " << harness::format_double(result.final_metrics.recall) << "\n";
    if (result.final_metrics.auc)
        std::cout << "final auc:      " << harness::format_double(*result.final_metrics.auc)
                  << "\n";
    return 0;
}

int cmd_dj_demo(int n) {
    // One constant oracle and one balanced oracle of width n.
    std::vector<std::uint8_t> constant(1ULL << n, 0);
    std::vector<std::uint8_t> balanced(1ULL << n, 0);
    for (std::size_t x = 0; x < balanced.size(); ++x) balanced[x] = x & 1 ? 1 : 0;

    const double p_const = qsim::deutsch_jozsa_zero_prob(qsim::BooleanOracle(n, constant));
    const double p_bal = qsim::deutsch_jozsa_zero_prob(qsim::BooleanOracle(n, balanced));
    std::cout << "Deutsch-Jozsa on " << n << " qubits\n";
    std::cout << "  constant oracle: P(all zeros) = " << harness::format_double(p_const) << "\n";
    std::cout << "  balanced oracle: P(all zeros) = " << harness::format_double(p_bal) << "\n";
    std::cout << "  (constant functions measure all zeros with probability 1, balanced with 0)\n";
    return 0;
}

int cmd_gradcheck(int instances, std::uint64_t seed) {
    const double h = 1e-5;
    double worst = 0.0;
    Rng rng(seed);
    for (int i = 0; i < instances; ++i) {
        vqc::VqcSpec spec;
        spec.n_qubits = 2 + static_cast<int>(rng.uniform_int(3));
        spec.n_layers = 1 + static_cast<int>(rng.uniform_int(3));
        vqc::ParamVector params(spec.param_count());
        for (auto& p : params) p = rng.uniform(-1.5, 1.5);
        vqc::FeatureVector features(spec.n_qubits);
        for (auto& f : features) f = rng.uniform(-1.5, 1.5);
        std::vector<double> weights(spec.n_qubits);
        for (auto& w : weights) w = rng.uniform(-1.0, 1.0);

        const auto analytic = vqc::parameter_shift_grad(spec, params, features, weights);
        const auto value = [&](const vqc::ParamVector& p) {
            const auto z = vqc::vqc_forward(spec, p, features);
            double f = 0.0;
            for (int q = 0; q < spec.n_qubits; ++q) f += weights[q] * z[q];
            return f;
        };
        double instance_worst = 0.0;
        vqc::ParamVector shifted = params;
        for (std::size_t k = 0; k < params.size(); ++k) {
            shifted[k] = params[k] + h;
            const double plus = value(shifted);
            shifted[k] = params[k] - h;
            const double minus = value(shifted);
            shifted[k] = params[k];
            const double fd = (plus - minus) / (2.0 * h);
            instance_worst = std::max(instance_worst, std::abs(fd - analytic[k]));
        }
        worst = std::max(worst, instance_worst);
        std::cout << "instance " << i << ": qubits=" << spec.n_qubits
                  << " layers=" << spec.n_layers
                  << " max |shift - fd| = " << harness::format_double(instance_worst) << "\n";
    }
    std::cout << "worst deviation over " << instances
              << " instances: " << harness::format_double(worst) << "\n";
    return worst < 1e-5 ? 0 : 1;
}

int cmd_partition_stats(const std::string& config_path) {
    const harness::ExperimentConfig config = harness::load_config(config_path);
    const std::uint64_t data_seed = derive_seed(config.seed, SeedDomain::DatasetGen);
    harness::Dataset data;
    switch (config.dataset.kind) {
        case harness::DatasetConfig::Kind::Blobs:
            data = harness::synth_dataset(harness::SynthKind::Blobs, config.dataset.n, data_seed,
                                          config.dataset.synth);
            break;
        case harness::DatasetConfig::Kind::Sequence:
            data = harness::synth_dataset(harness::SynthKind::Sequence, config.dataset.n,
                                          data_seed, config.dataset.synth);
            break;
        case harness::DatasetConfig::Kind::Csv:
            data = harness::load_csv_dataset(config.dataset.csv_path, config.dataset.label_column);
            break;
    }
    harness::PartitionSpec spec = config.partition;
    spec.seed = derive_seed(config.seed, SeedDomain::Partition);
    const auto shards = harness::partition_dataset(data, spec);
    const auto stats = harness::partition_label_stats(data, shards);

    std::cout << "client,rows";
    for (std::size_t c = 0; c < stats.label_counts.front().size(); ++c)
        std::cout << ",class" << c;
    std::cout << ",tv_distance\n";
    for (std::size_t k = 0; k < shards.size(); ++k) {
        std::cout << k << ',' << shards[k].n_samples();
        for (const auto count : stats.label_counts[k]) std::cout << ',' << count;
        std::cout << ',' << harness::format_double(stats.tv_distance[k]) << "\n";
    }
    return 0;
}

int cmd_qlstm_compare(const harness::ComparisonConfig& config) {
    std::cout << "federated QLSTM vs classical LSTM on synthetic sequences\n";
    std::cout << "  nodes=" << config.n_clients << " rounds=" << config.rounds
              << " seq_len=" << config.seq_len << " hidden=" << config.hidden_dim
              << " qubits=" << config.n_qubits << " layers=" << config.n_layers
              << " seed=" << config.seed << "\n";
    const harness::ComparisonReport report = harness::run_qlstm_comparison(config);
    const auto print = [](const char* name, const Metrics& m, std::size_t params) {
        std::cout << "  " << name << ": accuracy=" << harness::format_double(m.accuracy)
                  << " recall=" << harness::format_double(m.recall);
        if (m.auc) std::cout << " auc=" << harness::format_double(*m.auc);
        std::cout << " loss=" << harness::format_double(m.loss) << " trainables=" << params
                  << "\n";
    };
    print("qlstm", report.qlstm, report.qlstm_param_count);
    print("lstm ", report.lstm, report.lstm_param_count);
    std::cout << "  (reported for comparison only; no threshold is asserted)\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"qfl-lab: a quantum federated learning laboratory"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run = app.add_subcommand("run", "execute an experiment from a config file");
    run->add_option("config", config_path, "JSON experiment config")->required();

    int dj_n = 3;
    auto* dj = app.add_subcommand("dj-demo", "Deutsch-Jozsa simulator validation printout");
    dj->add_option("n", dj_n, "oracle input width (1-14)")->check(CLI::Range(1, 14));

    int grad_instances = 20;
    std::uint64_t grad_seed = 7;
    auto* grad = app.add_subcommand("gradcheck",
                                    "parameter-shift vs finite-difference gradient report");
    grad->add_option("--instances", grad_instances, "number of random VQC instances");
    grad->add_option("--seed", grad_seed, "instance seed");

    std::string stats_config;
    auto* stats = app.add_subcommand("partition-stats", "per-client label skew report");
    stats->add_option("config", stats_config, "JSON experiment config")->required();

    qfl::harness::ComparisonConfig cmp;
    auto* compare = app.add_subcommand("qlstm-compare",
                                       "train QLSTM and classical LSTM federations side by side");
    compare->add_option("--n", cmp.n, "number of sequence samples");
    compare->add_option("--nodes", cmp.n_clients, "federation size");
    compare->add_option("--rounds", cmp.rounds, "federated rounds");
    compare->add_option("--seq-len", cmp.seq_len, "sequence length");
    compare->add_option("--hidden", cmp.hidden_dim, "hidden dimension");
    compare->add_option("--qubits", cmp.n_qubits, "gate VQC qubits");
    compare->add_option("--layers", cmp.n_layers, "gate VQC layers");
    compare->add_option("--lr", cmp.learning_rate, "learning rate");
    compare->add_option("--seed", cmp.seed, "experiment seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(config_path);
        if (*dj) return cmd_dj_demo(dj_n);
        if (*grad) return cmd_gradcheck(grad_instances, grad_seed);
        if (*stats) return cmd_partition_stats(stats_config);
        if (*compare) return cmd_qlstm_compare(cmp);
    } catch (const qfl::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const qfl::StructuralError& e) {
        std::cerr << "structural error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
