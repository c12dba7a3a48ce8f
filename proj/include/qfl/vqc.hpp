#ifndef QFL_VQC_HPP
#define QFL_VQC_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "qfl/encoders.hpp"
#include "qfl/qsim.hpp"

namespace qfl::vqc {

using encoders::FeatureVector;

// Flat trainable parameter vector. Layout for a layered VQC is layer-major:
// index = 3 * (layer * n_qubits + qubit) + k with k in {0: phi, 1: theta,
// 2: omega} of that qubit's Rot gate.
using ParamVector = std::vector<double>;

// Layered ansatz: angle-encoding prefix, then per layer one Rot per qubit
// followed by a CNOT ring i -> (i+1) mod n.
struct VqcSpec {
    int n_qubits = 1;
    int n_layers = 0;

    std::size_t param_count() const {
        return 3u * static_cast<std::size_t>(n_qubits) * static_cast<std::size_t>(n_layers);
    }
    void validate() const;
};

std::size_t param_index(const VqcSpec& spec, int layer, int qubit, int component);

void validate_params(const VqcSpec& spec, const ParamVector& params);

struct ForwardOptions {
    std::optional<std::size_t> shots; // absent = exact expectations
    qsim::NoiseSpec noise;
    std::uint64_t seed = 0; // drives shot sampling only
};

qsim::Circuit build_vqc(const VqcSpec& spec, const ParamVector& params,
                        const FeatureVector& features);

// Per-qubit Z expectations of the ansatz run on |0...0>. Analytic when shots
// are absent, shot-estimated otherwise; noise applied per apply_noise.
std::vector<double> vqc_forward(const VqcSpec& spec, const ParamVector& params,
                                const FeatureVector& features,
                                const ForwardOptions& options = {});

// Exact gradient of f = sum_q weights[q] * <Z_q> via the +-pi/2 shift rule:
// grad_k = (f(theta_k + pi/2) - f(theta_k - pi/2)) / 2. Analytic mode only;
// requesting shots raises UnsupportedModeError. Noiseless by definition —
// callers chain the (1-p) depolarizing factor themselves.
ParamVector parameter_shift_grad(const VqcSpec& spec, const ParamVector& params,
                                 const FeatureVector& features,
                                 const std::vector<double>& observable_weights,
                                 const ForwardOptions& options = {});

// d<Z_q>/d theta_k for every (q, k); rows indexed by qubit.
std::vector<std::vector<double>> jacobian_params(const VqcSpec& spec, const ParamVector& params,
                                                 const FeatureVector& features);

// d<Z_q>/d x_i obtained by shifting encoding angles, valid because the
// encoding is RX(x_i); rows indexed by qubit, columns by feature.
std::vector<std::vector<double>> jacobian_features(const VqcSpec& spec, const ParamVector& params,
                                                   const FeatureVector& features);

// params - lr * grads, elementwise.
ParamVector sgd_step(const ParamVector& params, const ParamVector& grads, double lr);

// Uniform init in [-range, range], the small-angle start used everywhere.
ParamVector random_init(std::size_t count, std::uint64_t seed, double range = 0.1);

} // namespace qfl::vqc

#endif
