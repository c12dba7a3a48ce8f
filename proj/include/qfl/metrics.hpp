#ifndef QFL_METRICS_HPP
#define QFL_METRICS_HPP

#include <optional>
#include <vector>

namespace qfl {

struct Metrics {
    double accuracy = 0.0;
    double recall = 0.0;
    std::optional<double> auc; // absent when the test set has a single class
    double loss = 0.0;
};

// Rank-based (Mann-Whitney) AUC over binary labels, ties averaged; absent
// when only one class is present.
std::optional<double> auc_rank_based(const std::vector<double>& scores,
                                     const std::vector<int>& labels);

// Binary classification metrics from raw logits: predicted class is
// score > 0, recall is measured on the positive class, loss is mean
// logistic loss.
Metrics evaluate_binary(const std::vector<double>& scores, const std::vector<int>& labels);

} // namespace qfl

#endif
