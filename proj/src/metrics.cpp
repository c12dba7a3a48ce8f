#include "qfl/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "qfl/errors.hpp"
#include "qfl/losses.hpp"

namespace qfl {

std::optional<double> auc_rank_based(const std::vector<double>& scores,
                                     const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw ValidationError("auc_rank_based: scores and labels differ in length");
    std::size_t positives = 0;
    for (int l : labels) positives += l == 1 ? 1 : 0;
    const std::size_t negatives = labels.size() - positives;
    if (positives == 0 || negatives == 0) return std::nullopt;

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Average ranks within tie groups, 1-based.
    double positive_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>((i + 1) + (j + 1));
        for (std::size_t k = i; k <= j; ++k)
            if (labels[order[k]] == 1) positive_rank_sum += avg_rank;
        i = j + 1;
    }
    const double p = static_cast<double>(positives);
    const double n = static_cast<double>(negatives);
    return (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * n);
}

Metrics evaluate_binary(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.empty()) throw ValidationError("evaluate_binary: empty test set");
    if (scores.size() != labels.size())
        throw ValidationError("evaluate_binary: scores and labels differ in length");

    std::size_t correct = 0, tp = 0, fn = 0;
    double loss_sum = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const int predicted = scores[i] > 0.0 ? 1 : 0;
        if (predicted == labels[i]) ++correct;
        if (labels[i] == 1) {
            if (predicted == 1)
                ++tp;
            else
                ++fn;
        }
        loss_sum += losses::logistic_loss(scores[i], labels[i]).loss;
    }

    Metrics m;
    m.accuracy = static_cast<double>(correct) / static_cast<double>(scores.size());
    m.recall = (tp + fn) == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    m.auc = auc_rank_based(scores, labels);
    m.loss = loss_sum / static_cast<double>(scores.size());
    return m;
}

} // namespace qfl
