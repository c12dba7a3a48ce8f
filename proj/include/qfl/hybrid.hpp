#ifndef QFL_HYBRID_HPP
#define QFL_HYBRID_HPP

#include <cstdint>
#include <vector>

#include "qfl/linalg.hpp"
#include "qfl/vqc.hpp"

namespace qfl::hybrid {

using vqc::FeatureVector;
using vqc::ParamVector;

// Classical projection -> angle-encoded VQC -> affine head. The projection
// carries wide feature vectors down to one encoding angle per qubit; the
// head maps per-qubit Z expectations to class logits (a single logit for
// binary tasks).
struct HybridSpec {
    std::size_t in_features = 1;
    vqc::VqcSpec vqc;
    int n_classes = 1;

    void validate() const;
    // projection (in_features x n_qubits), VQC angles, head weight
    // (n_classes x n_qubits), head bias.
    std::size_t param_count() const;
};

struct HybridWeights {
    Matrix projection; // in_features rows, n_qubits cols
    ParamVector theta;
    Matrix head_w; // n_classes rows, n_qubits cols
    std::vector<double> head_b;
};

HybridWeights unpack(const HybridSpec& spec, const ParamVector& params);
ParamVector pack(const HybridSpec& spec, const HybridWeights& weights);

// logits = head(vqc_forward(projection . input)).
std::vector<double> hybrid_forward(const HybridSpec& spec, const ParamVector& params,
                                   const FeatureVector& input,
                                   const vqc::ForwardOptions& options = {});

// Full gradient given dL/dlogits: analytic backprop through the affine maps,
// parameter-shift through the quantum block (encoding-angle shifts give the
// projection its gradient). Analytic mode only.
ParamVector hybrid_backward(const HybridSpec& spec, const ParamVector& params,
                            const FeatureVector& input,
                            const std::vector<double>& dloss_dlogits,
                            const vqc::ForwardOptions& options = {});

ParamVector hybrid_init(const HybridSpec& spec, std::uint64_t seed);

} // namespace qfl::hybrid

#endif
