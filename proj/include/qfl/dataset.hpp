#ifndef QFL_DATASET_HPP
#define QFL_DATASET_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "qfl/errors.hpp"

namespace qfl::harness {

// Tabular or sequential data. Feature rows are stored flat; sample s owns
// rows [s * seq_len, (s + 1) * seq_len) and one label. Tabular data has
// seq_len = 1.
struct Dataset {
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    int seq_len = 1;

    std::size_t n_samples() const { return labels.size(); }
    std::size_t n_features() const { return rows.empty() ? 0 : rows.front().size(); }
    std::vector<std::vector<double>> sample_rows(std::size_t sample) const;

    void validate() const;
};

enum class SynthKind { Blobs, Sequence };

struct SynthOptions {
    // blobs: two Gaussian clusters at +-(separation * sigma / 2) per
    // dimension, so the centers sit `separation` standard deviations apart.
    int dims = 4;
    double separation = 6.0;
    double sigma = 0.25;
    // sequence: noisy sinusoid windows; the label says whether the clean
    // signal rises at the next step.
    int seq_len = 8;
    double omega = 0.7;
    double noise_sigma = 0.2;
};

Dataset synth_dataset(SynthKind kind, std::size_t n, std::uint64_t seed,
                      const SynthOptions& options = {});

enum class PartitionScheme { Iid, DirichletLabelSkew, LongTail };

struct PartitionSpec {
    PartitionScheme scheme = PartitionScheme::Iid;
    int n_clients = 1;
    double alpha = 1.0;           // dirichlet concentration
    double imbalance_ratio = 1.0; // long-tail head/tail class frequency ratio
    std::uint64_t seed = 0;

    void validate() const;
};

// Splits every sample into exactly one client shard (no loss, no
// duplication). iid deals a seeded shuffle into near-equal shards; dirichlet
// draws per-class client proportions from Dir(alpha); long_tail gives client
// k a head class (k mod n_classes) carrying `imbalance_ratio` times the
// weight of every other class.
std::vector<Dataset> partition_dataset(const Dataset& data, const PartitionSpec& spec);

// Seeded train/test split at sample granularity.
struct SplitDataset {
    Dataset train;
    Dataset test;
};
SplitDataset train_test_split(const Dataset& data, double test_fraction, std::uint64_t seed);

// CSV ingestion: first row is the header, the named label column holds
// integer class labels, every other column is numeric. Features are min-max
// scaled to [-pi, pi] here, the single scaling point for angle encoding.
// Non-numeric cells raise a ValidationError naming the row and column.
Dataset load_csv_dataset(const std::string& path, const std::string& label_column);

// Per-client label histogram and total-variation distance to the global
// label distribution, for the partition-stats report.
struct PartitionStats {
    std::vector<std::vector<std::size_t>> label_counts; // [client][class]
    std::vector<double> tv_distance;                    // [client]
};
PartitionStats partition_label_stats(const Dataset& data, const std::vector<Dataset>& shards);

} // namespace qfl::harness

#endif
