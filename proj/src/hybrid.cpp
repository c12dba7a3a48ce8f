#include "qfl/hybrid.hpp"

#include <cmath>

#include "qfl/rng.hpp"

namespace qfl::hybrid {

void HybridSpec::validate() const {
    if (in_features < 1) throw ValidationError("HybridSpec: in_features must be >= 1");
    if (n_classes < 1) throw ValidationError("HybridSpec: n_classes must be >= 1");
    vqc.validate();
}

std::size_t HybridSpec::param_count() const {
    const std::size_t n = static_cast<std::size_t>(vqc.n_qubits);
    return in_features * n + vqc.param_count() +
           static_cast<std::size_t>(n_classes) * n + static_cast<std::size_t>(n_classes);
}

HybridWeights unpack(const HybridSpec& spec, const ParamVector& params) {
    spec.validate();
    if (params.size() != spec.param_count())
        throw ValidationError("hybrid parameter vector has wrong length");
    const std::size_t n = static_cast<std::size_t>(spec.vqc.n_qubits);
    HybridWeights w;
    std::size_t pos = 0;
    const auto take = [&](std::size_t count) {
        const std::size_t start = pos;
        pos += count;
        return std::vector<double>(params.begin() + start, params.begin() + pos);
    };
    w.projection = Matrix(spec.in_features, n);
    w.projection.data = take(spec.in_features * n);
    w.theta = take(spec.vqc.param_count());
    w.head_w = Matrix(spec.n_classes, n);
    w.head_w.data = take(static_cast<std::size_t>(spec.n_classes) * n);
    w.head_b = take(spec.n_classes);
    return w;
}

ParamVector pack(const HybridSpec& spec, const HybridWeights& w) {
    ParamVector out;
    out.reserve(spec.param_count());
    out.insert(out.end(), w.projection.data.begin(), w.projection.data.end());
    out.insert(out.end(), w.theta.begin(), w.theta.end());
    out.insert(out.end(), w.head_w.data.begin(), w.head_w.data.end());
    out.insert(out.end(), w.head_b.begin(), w.head_b.end());
    if (out.size() != spec.param_count()) throw StructuralError("pack: inconsistent weight shapes");
    return out;
}

std::vector<double> hybrid_forward(const HybridSpec& spec, const ParamVector& params,
                                   const FeatureVector& input,
                                   const vqc::ForwardOptions& options) {
    const HybridWeights w = unpack(spec, params);
    if (input.size() != spec.in_features)
        throw ValidationError("hybrid_forward: input width does not match in_features");
    const std::vector<double> projected = mat_t_vec(w.projection, input);
    const std::vector<double> z = vqc::vqc_forward(spec.vqc, w.theta, projected, options);
    std::vector<double> logits = mat_vec(w.head_w, z);
    for (int c = 0; c < spec.n_classes; ++c) logits[c] += w.head_b[c];
    return logits;
}

ParamVector hybrid_backward(const HybridSpec& spec, const ParamVector& params,
                            const FeatureVector& input,
                            const std::vector<double>& dloss_dlogits,
                            const vqc::ForwardOptions& options) {
    if (options.shots)
        throw UnsupportedModeError("hybrid_backward supports analytic mode only");
    const HybridWeights w = unpack(spec, params);
    if (input.size() != spec.in_features)
        throw ValidationError("hybrid_backward: input width does not match in_features");
    if (dloss_dlogits.size() != static_cast<std::size_t>(spec.n_classes))
        throw ValidationError("hybrid_backward: dloss_dlogits length does not match n_classes");

    const std::size_t n = static_cast<std::size_t>(spec.vqc.n_qubits);
    const std::vector<double> projected = mat_t_vec(w.projection, input);
    const std::vector<double> z = vqc::vqc_forward(spec.vqc, w.theta, projected, options);
    // Jacobians are noiseless; depolarizing contributes a flat (1-p) factor.
    const double noise_scale = qsim::apply_noise({1.0}, options.noise)[0];

    HybridWeights grad;
    grad.projection = Matrix(spec.in_features, n);
    grad.theta = ParamVector(spec.vqc.param_count(), 0.0);
    grad.head_w = Matrix(spec.n_classes, n);
    grad.head_b.assign(spec.n_classes, 0.0);

    for (int c = 0; c < spec.n_classes; ++c) {
        grad.head_b[c] += dloss_dlogits[c];
        for (std::size_t q = 0; q < n; ++q)
            grad.head_w.at(c, q) += dloss_dlogits[c] * z[q];
    }
    std::vector<double> dz = mat_t_vec(w.head_w, dloss_dlogits);
    for (auto& v : dz) v *= noise_scale;

    const auto j_theta = vqc::jacobian_params(spec.vqc, w.theta, projected);
    for (std::size_t q = 0; q < n; ++q)
        for (std::size_t k = 0; k < grad.theta.size(); ++k)
            grad.theta[k] += dz[q] * j_theta[q][k];

    const auto j_proj = vqc::jacobian_features(spec.vqc, w.theta, projected);
    std::vector<double> dprojected(n, 0.0);
    for (std::size_t q = 0; q < n; ++q)
        for (std::size_t m = 0; m < n; ++m) dprojected[m] += dz[q] * j_proj[q][m];
    for (std::size_t i = 0; i < spec.in_features; ++i)
        for (std::size_t q = 0; q < n; ++q)
            grad.projection.at(i, q) += dprojected[q] * input[i];

    return pack(spec, grad);
}

ParamVector hybrid_init(const HybridSpec& spec, std::uint64_t seed) {
    spec.validate();
    Rng rng(seed);
    HybridWeights w;
    const std::size_t n = static_cast<std::size_t>(spec.vqc.n_qubits);
    const double s_proj = 1.0 / std::sqrt(static_cast<double>(spec.in_features));
    const double s_head = 1.0 / std::sqrt(static_cast<double>(n));
    w.projection = Matrix(spec.in_features, n);
    for (auto& v : w.projection.data) v = rng.uniform(-s_proj, s_proj);
    w.theta = ParamVector(spec.vqc.param_count());
    for (auto& v : w.theta) v = rng.uniform(-0.1, 0.1);
    w.head_w = Matrix(spec.n_classes, n);
    for (auto& v : w.head_w.data) v = rng.uniform(-s_head, s_head);
    w.head_b.assign(spec.n_classes, 0.0);
    return pack(spec, w);
}

} // namespace qfl::hybrid
