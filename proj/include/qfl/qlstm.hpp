#ifndef QFL_QLSTM_HPP
#define QFL_QLSTM_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "qfl/linalg.hpp"
#include "qfl/vqc.hpp"

namespace qfl::qlstm {

using vqc::FeatureVector;
using vqc::ParamVector;

// LSTM cell whose four gate networks (forget, input, update, output) are
// VQCs of a shared shape, with classical linear maps reconciling dimensions
// on the way in (concat(x, h) -> encoding angles) and out (expectations ->
// hidden size). Output is read from the last cell only.
struct QlstmSpec {
    int input_dim = 1;
    int hidden_dim = 2;
    int seq_len = 1;
    vqc::VqcSpec gate_vqc;
    int output_dim = 1;

    void validate() const;

    std::size_t concat_dim() const { return static_cast<std::size_t>(input_dim + hidden_dim); }
    // One gate block: W_in (n_qubits x concat), the VQC angles, W_out
    // (hidden x n_qubits).
    std::size_t gate_block_count() const;
    // Four gate blocks plus the affine head (output x hidden plus bias).
    std::size_t param_count() const;
};

// Unpacked view of the flat vector; block order is forget, input, update,
// output, then head weight and bias.
struct GateBlock {
    Matrix w_in;
    ParamVector theta;
    Matrix w_out;
};

struct QlstmWeights {
    std::array<GateBlock, 4> gates;
    Matrix head_w;
    std::vector<double> head_b;
};

QlstmWeights unpack(const QlstmSpec& spec, const ParamVector& params);
ParamVector pack(const QlstmSpec& spec, const QlstmWeights& weights);

// Head output after processing the full sequence; h_0 = c_0 = 0.
std::vector<double> qlstm_forward(const QlstmSpec& spec, const ParamVector& params,
                                  const std::vector<FeatureVector>& sequence);

// Full gradient of a scalar loss given dL/d(output), by backpropagation
// through time; VQC blocks contribute parameter-shift Jacobians and the
// chain rule treats their expectations as differentiable inputs.
ParamVector qlstm_backward(const QlstmSpec& spec, const ParamVector& params,
                           const std::vector<FeatureVector>& sequence,
                           const std::vector<double>& dloss_doutput);

// Quantum angles start uniform in [-0.1, 0.1]; classical maps use the usual
// 1/sqrt(fan_in) scale.
ParamVector qlstm_init(const QlstmSpec& spec, std::uint64_t seed);

// Classical LSTM of matching shape, used as the comparison baseline: each
// gate is a single linear map pre_g = W_g * concat(x, h).
struct ClassicalLstmSpec {
    int input_dim = 1;
    int hidden_dim = 2;
    int seq_len = 1;
    int output_dim = 1;

    void validate() const;
    std::size_t concat_dim() const { return static_cast<std::size_t>(input_dim + hidden_dim); }
    std::size_t param_count() const;
};

std::vector<double> lstm_forward(const ClassicalLstmSpec& spec, const ParamVector& params,
                                 const std::vector<FeatureVector>& sequence);

ParamVector lstm_backward(const ClassicalLstmSpec& spec, const ParamVector& params,
                          const std::vector<FeatureVector>& sequence,
                          const std::vector<double>& dloss_doutput);

ParamVector lstm_init(const ClassicalLstmSpec& spec, std::uint64_t seed);

} // namespace qfl::qlstm

#endif
