#ifndef QFL_LOSSES_HPP
#define QFL_LOSSES_HPP

#include <cmath>
#include <vector>

#include "qfl/errors.hpp"

namespace qfl::losses {

struct ScalarLossGrad {
    double loss = 0.0;
    double dlogit = 0.0;
};

// Binary logistic loss on a single logit, label in {0, 1}.
inline ScalarLossGrad logistic_loss(double logit, int label) {
    if (label != 0 && label != 1) throw ValidationError("logistic_loss: label must be 0 or 1");
    const double t = label == 1 ? 1.0 : -1.0;
    const double m = -t * logit;
    // log(1 + e^m) without overflow for large m.
    const double loss = m > 0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
    const double sig = 1.0 / (1.0 + std::exp(-m));
    return {loss, -t * sig};
}

struct VectorLossGrad {
    double loss = 0.0;
    std::vector<double> dlogits;
};

// Softmax cross-entropy for multiclass heads.
inline VectorLossGrad softmax_cross_entropy(const std::vector<double>& logits, int label) {
    if (label < 0 || label >= static_cast<int>(logits.size()))
        throw ValidationError("softmax_cross_entropy: label out of range");
    double max_logit = logits[0];
    for (double l : logits) max_logit = std::max(max_logit, l);
    double denom = 0.0;
    for (double l : logits) denom += std::exp(l - max_logit);
    VectorLossGrad out;
    out.dlogits.resize(logits.size());
    for (std::size_t c = 0; c < logits.size(); ++c) {
        const double p = std::exp(logits[c] - max_logit) / denom;
        out.dlogits[c] = p - (static_cast<int>(c) == label ? 1.0 : 0.0);
        if (static_cast<int>(c) == label) out.loss = -(logits[c] - max_logit - std::log(denom));
    }
    return out;
}

} // namespace qfl::losses

#endif
