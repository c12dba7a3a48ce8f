#include "qfl/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "qfl/rng.hpp"

namespace qfl::harness {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

int max_label(const std::vector<int>& labels) {
    int m = 0;
    for (int l : labels) m = std::max(m, l);
    return m;
}

// Largest-remainder allocation of `total` items to weighted bins; ties go to
// the lower index. Conserves the total exactly.
std::vector<std::size_t> allocate_counts(std::size_t total, const std::vector<double>& weights) {
    double weight_sum = 0.0;
    for (double w : weights) weight_sum += w;
    std::vector<std::size_t> counts(weights.size(), 0);
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        const double exact = static_cast<double>(total) * weights[k] / weight_sum;
        counts[k] = static_cast<std::size_t>(std::floor(exact));
        assigned += counts[k];
        remainders.push_back({exact - std::floor(exact), k});
    }
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    for (std::size_t i = 0; assigned < total; ++i, ++assigned) ++counts[remainders[i].second];
    return counts;
}

Dataset gather_samples(const Dataset& data, const std::vector<std::size_t>& samples) {
    Dataset shard;
    shard.seq_len = data.seq_len;
    for (std::size_t s : samples) {
        for (int r = 0; r < data.seq_len; ++r)
            shard.rows.push_back(data.rows[s * data.seq_len + r]);
        shard.labels.push_back(data.labels[s]);
    }
    return shard;
}

} // namespace

std::vector<std::vector<double>> Dataset::sample_rows(std::size_t sample) const {
    std::vector<std::vector<double>> out;
    for (int r = 0; r < seq_len; ++r) out.push_back(rows.at(sample * seq_len + r));
    return out;
}

void Dataset::validate() const {
    if (seq_len < 1) throw ValidationError("dataset: seq_len must be >= 1");
    if (rows.size() != labels.size() * static_cast<std::size_t>(seq_len))
        throw ValidationError("dataset: row count does not match labels * seq_len");
    const std::size_t width = n_features();
    for (const auto& row : rows) {
        if (row.size() != width) throw ValidationError("dataset: ragged feature rows");
        for (double v : row)
            if (!std::isfinite(v)) throw ValidationError("dataset: non-finite feature");
    }
    for (int l : labels)
        if (l < 0) throw ValidationError("dataset: labels must be nonnegative integers");
}

Dataset synth_dataset(SynthKind kind, std::size_t n, std::uint64_t seed,
                      const SynthOptions& options) {
    if (n < 2) throw ValidationError("synth_dataset: need at least 2 samples");
    Rng rng(seed);
    Dataset data;

    if (kind == SynthKind::Blobs) {
        if (options.dims < 2 || options.dims > 4)
            throw ValidationError("synth_dataset: blobs support 2-4 dimensions");
        const double center = options.separation * options.sigma / 2.0;
        data.seq_len = 1;
        for (std::size_t s = 0; s < n; ++s) {
            const int label = static_cast<int>(s % 2);
            const double mu = label == 1 ? center : -center;
            std::vector<double> row(options.dims);
            for (auto& v : row) v = mu + options.sigma * rng.normal();
            data.rows.push_back(std::move(row));
            data.labels.push_back(label);
        }
    } else {
        if (options.seq_len < 2) throw ValidationError("synth_dataset: seq_len must be >= 2");
        data.seq_len = options.seq_len;
        for (std::size_t s = 0; s < n; ++s) {
            const double phase = rng.uniform(0.0, 2.0 * kPi);
            for (int t = 0; t < options.seq_len; ++t) {
                const double clean = std::sin(options.omega * t + phase);
                data.rows.push_back({clean + options.noise_sigma * rng.normal()});
            }
            const double last = std::sin(options.omega * (options.seq_len - 1) + phase);
            const double next = std::sin(options.omega * options.seq_len + phase);
            data.labels.push_back(next > last ? 1 : 0);
        }
    }
    data.validate();
    return data;
}

void PartitionSpec::validate() const {
    if (n_clients < 1) throw ValidationError("partition: n_clients must be >= 1");
    if (!(alpha > 0.0)) throw ValidationError("partition: alpha must be positive");
    if (!(imbalance_ratio >= 1.0)) throw ValidationError("partition: imbalance ratio must be >= 1");
}

std::vector<Dataset> partition_dataset(const Dataset& data, const PartitionSpec& spec) {
    spec.validate();
    data.validate();
    const std::size_t n = data.n_samples();
    if (static_cast<std::size_t>(spec.n_clients) > n)
        throw ValidationError("partition: more clients than samples");

    const std::size_t k = static_cast<std::size_t>(spec.n_clients);
    std::vector<std::vector<std::size_t>> assignment(k);
    Rng rng(spec.seed);

    if (spec.scheme == PartitionScheme::Iid) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(order);
        for (std::size_t i = 0; i < n; ++i) assignment[i % k].push_back(order[i]);
    } else {
        // Group samples by class, then allocate each class to clients.
        const int n_classes = max_label(data.labels) + 1;
        std::vector<std::vector<std::size_t>> by_class(n_classes);
        for (std::size_t s = 0; s < n; ++s) by_class[data.labels[s]].push_back(s);

        for (int c = 0; c < n_classes; ++c) {
            auto& members = by_class[c];
            rng.shuffle(members);
            std::vector<double> weights(k);
            if (spec.scheme == PartitionScheme::DirichletLabelSkew) {
                weights = rng.dirichlet(spec.alpha, k);
            } else {
                // Client i's head class is i mod n_classes.
                for (std::size_t i = 0; i < k; ++i)
                    weights[i] = (static_cast<int>(i) % n_classes == c) ? spec.imbalance_ratio : 1.0;
            }
            const auto counts = allocate_counts(members.size(), weights);
            std::size_t pos = 0;
            for (std::size_t i = 0; i < k; ++i)
                for (std::size_t j = 0; j < counts[i]; ++j) assignment[i].push_back(members[pos++]);
        }
        for (auto& shard : assignment) std::sort(shard.begin(), shard.end());
    }

    std::vector<Dataset> shards;
    shards.reserve(k);
    for (const auto& samples : assignment) shards.push_back(gather_samples(data, samples));
    return shards;
}

SplitDataset train_test_split(const Dataset& data, double test_fraction, std::uint64_t seed) {
    data.validate();
    if (!(test_fraction > 0.0) || !(test_fraction < 1.0))
        throw ValidationError("train_test_split: fraction must lie in (0, 1)");
    const std::size_t n = data.n_samples();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order);
    const std::size_t n_test = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n))));
    std::vector<std::size_t> test_samples(order.begin(), order.begin() + n_test);
    std::vector<std::size_t> train_samples(order.begin() + n_test, order.end());
    std::sort(test_samples.begin(), test_samples.end());
    std::sort(train_samples.begin(), train_samples.end());
    return {gather_samples(data, train_samples), gather_samples(data, test_samples)};
}

Dataset load_csv_dataset(const std::string& path, const std::string& label_column) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open CSV file: " + path);

    const auto split = [](const std::string& line) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        return cells;
    };

    std::string line;
    if (!std::getline(in, line)) throw ValidationError("CSV file is empty: " + path);
    const auto header = split(line);
    std::size_t label_idx = header.size();
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == label_column) label_idx = i;
    if (label_idx == header.size())
        throw ValidationError("CSV has no column named '" + label_column + "'");

    Dataset data;
    data.seq_len = 1;
    std::size_t row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != header.size())
            throw ValidationError("CSV row " + std::to_string(row_no) + " has " +
                                  std::to_string(cells.size()) + " cells, expected " +
                                  std::to_string(header.size()));
        std::vector<double> row;
        row.reserve(header.size() - 1);
        for (std::size_t i = 0; i < cells.size(); ++i) {
            double value = 0.0;
            const char* begin = cells[i].data();
            const char* end = begin + cells[i].size();
            const auto [ptr, ec] = std::from_chars(begin, end, value);
            if (ec != std::errc() || ptr != end || cells[i].empty())
                throw ValidationError("CSV row " + std::to_string(row_no) + ", column '" +
                                      header[i] + "': non-numeric cell '" + cells[i] + "'");
            if (i == label_idx) {
                const int label = static_cast<int>(std::llround(value));
                if (static_cast<double>(label) != value || label < 0)
                    throw ValidationError("CSV row " + std::to_string(row_no) +
                                          ": label must be a nonnegative integer");
                data.labels.push_back(label);
            } else {
                row.push_back(value);
            }
        }
        data.rows.push_back(std::move(row));
    }
    if (data.labels.empty()) throw ValidationError("CSV has no data rows: " + path);

    // Min-max scale each feature column to [-pi, pi]; constant columns map
    // to zero.
    const std::size_t width = data.n_features();
    for (std::size_t c = 0; c < width; ++c) {
        double lo = data.rows[0][c], hi = data.rows[0][c];
        for (const auto& row : data.rows) {
            lo = std::min(lo, row[c]);
            hi = std::max(hi, row[c]);
        }
        for (auto& row : data.rows)
            row[c] = hi > lo ? (row[c] - lo) / (hi - lo) * 2.0 * kPi - kPi : 0.0;
    }
    data.validate();
    return data;
}

PartitionStats partition_label_stats(const Dataset& data, const std::vector<Dataset>& shards) {
    const int n_classes = max_label(data.labels) + 1;
    std::vector<double> global(n_classes, 0.0);
    for (int l : data.labels) global[l] += 1.0;
    for (auto& g : global) g /= static_cast<double>(data.labels.size());

    PartitionStats stats;
    for (const auto& shard : shards) {
        std::vector<std::size_t> counts(n_classes, 0);
        for (int l : shard.labels) ++counts[l];
        double tv = 0.0;
        for (int c = 0; c < n_classes; ++c) {
            const double p = shard.labels.empty()
                                 ? 0.0
                                 : static_cast<double>(counts[c]) /
                                       static_cast<double>(shard.labels.size());
            tv += std::abs(p - global[c]);
        }
        stats.label_counts.push_back(std::move(counts));
        stats.tv_distance.push_back(0.5 * tv);
    }
    return stats;
}

} // namespace qfl::harness
