#include "qfl/qlstm.hpp"

#include <cmath>

#include "qfl/rng.hpp"

namespace qfl::qlstm {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<double> concat(const FeatureVector& x, const std::vector<double>& h) {
    std::vector<double> v;
    v.reserve(x.size() + h.size());
    v.insert(v.end(), x.begin(), x.end());
    v.insert(v.end(), h.begin(), h.end());
    return v;
}

void check_sequence(int seq_len, int input_dim, const std::vector<FeatureVector>& sequence) {
    if (static_cast<int>(sequence.size()) != seq_len)
        throw ValidationError("sequence length " + std::to_string(sequence.size()) +
                              " does not match seq_len " + std::to_string(seq_len));
    for (const auto& x : sequence)
        if (static_cast<int>(x.size()) != input_dim)
            throw ValidationError("sequence step width does not match input_dim");
}

// Everything the backward pass needs, per time step.
struct StepCache {
    std::vector<double> v;                        // concat(x_t, h_{t-1})
    std::array<std::vector<double>, 4> a;         // encoding angles per gate
    std::array<std::vector<double>, 4> z;         // VQC expectations per gate
    std::array<std::vector<double>, 4> act;       // f, i, u, o after activation
    std::vector<double> c_prev, c, tanh_c, h;
};

StepCache run_cell(const QlstmSpec& spec, const QlstmWeights& w, const FeatureVector& x,
                   const std::vector<double>& h_prev, const std::vector<double>& c_prev) {
    StepCache cache;
    cache.v = concat(x, h_prev);
    cache.c_prev = c_prev;
    std::array<std::vector<double>, 4> pre;
    for (int g = 0; g < 4; ++g) {
        cache.a[g] = mat_vec(w.gates[g].w_in, cache.v);
        cache.z[g] = vqc::vqc_forward(spec.gate_vqc, w.gates[g].theta, cache.a[g]);
        pre[g] = mat_vec(w.gates[g].w_out, cache.z[g]);
    }
    const std::size_t hd = static_cast<std::size_t>(spec.hidden_dim);
    for (int g = 0; g < 4; ++g) cache.act[g].resize(hd);
    cache.c.resize(hd);
    cache.tanh_c.resize(hd);
    cache.h.resize(hd);
    for (std::size_t j = 0; j < hd; ++j) {
        const double f = sigmoid(pre[0][j]);
        const double i = sigmoid(pre[1][j]);
        const double u = std::tanh(pre[2][j]);
        const double o = sigmoid(pre[3][j]);
        cache.act[0][j] = f;
        cache.act[1][j] = i;
        cache.act[2][j] = u;
        cache.act[3][j] = o;
        cache.c[j] = f * c_prev[j] + i * u;
        cache.tanh_c[j] = std::tanh(cache.c[j]);
        cache.h[j] = o * cache.tanh_c[j];
    }
    return cache;
}

} // namespace

void QlstmSpec::validate() const {
    if (input_dim < 1) throw ValidationError("QlstmSpec: input_dim must be >= 1");
    if (hidden_dim < 1) throw ValidationError("QlstmSpec: hidden_dim must be >= 1");
    if (seq_len < 1) throw ValidationError("QlstmSpec: seq_len must be >= 1");
    if (output_dim < 1) throw ValidationError("QlstmSpec: output_dim must be >= 1");
    gate_vqc.validate();
}

std::size_t QlstmSpec::gate_block_count() const {
    const std::size_t n = static_cast<std::size_t>(gate_vqc.n_qubits);
    return n * concat_dim() + gate_vqc.param_count() + static_cast<std::size_t>(hidden_dim) * n;
}

std::size_t QlstmSpec::param_count() const {
    return 4 * gate_block_count() +
           static_cast<std::size_t>(output_dim) * static_cast<std::size_t>(hidden_dim) +
           static_cast<std::size_t>(output_dim);
}

QlstmWeights unpack(const QlstmSpec& spec, const ParamVector& params) {
    spec.validate();
    if (params.size() != spec.param_count())
        throw ValidationError("QLSTM parameter vector has wrong length");
    const std::size_t n = static_cast<std::size_t>(spec.gate_vqc.n_qubits);
    const std::size_t cd = spec.concat_dim();
    const std::size_t hd = static_cast<std::size_t>(spec.hidden_dim);
    const std::size_t od = static_cast<std::size_t>(spec.output_dim);

    QlstmWeights w;
    std::size_t pos = 0;
    const auto take = [&](std::size_t count) {
        const std::size_t start = pos;
        pos += count;
        return std::vector<double>(params.begin() + start, params.begin() + pos);
    };
    for (int g = 0; g < 4; ++g) {
        w.gates[g].w_in = Matrix(n, cd);
        w.gates[g].w_in.data = take(n * cd);
        w.gates[g].theta = take(spec.gate_vqc.param_count());
        w.gates[g].w_out = Matrix(hd, n);
        w.gates[g].w_out.data = take(hd * n);
    }
    w.head_w = Matrix(od, hd);
    w.head_w.data = take(od * hd);
    w.head_b = take(od);
    return w;
}

ParamVector pack(const QlstmSpec& spec, const QlstmWeights& w) {
    ParamVector out;
    out.reserve(spec.param_count());
    for (int g = 0; g < 4; ++g) {
        out.insert(out.end(), w.gates[g].w_in.data.begin(), w.gates[g].w_in.data.end());
        out.insert(out.end(), w.gates[g].theta.begin(), w.gates[g].theta.end());
        out.insert(out.end(), w.gates[g].w_out.data.begin(), w.gates[g].w_out.data.end());
    }
    out.insert(out.end(), w.head_w.data.begin(), w.head_w.data.end());
    out.insert(out.end(), w.head_b.begin(), w.head_b.end());
    if (out.size() != spec.param_count()) throw StructuralError("pack: inconsistent weight shapes");
    return out;
}

std::vector<double> qlstm_forward(const QlstmSpec& spec, const ParamVector& params,
                                  const std::vector<FeatureVector>& sequence) {
    const QlstmWeights w = unpack(spec, params);
    check_sequence(spec.seq_len, spec.input_dim, sequence);
    std::vector<double> h(spec.hidden_dim, 0.0), c(spec.hidden_dim, 0.0);
    for (const auto& x : sequence) {
        const StepCache cache = run_cell(spec, w, x, h, c);
        h = cache.h;
        c = cache.c;
    }
    std::vector<double> y = mat_vec(w.head_w, h);
    for (int r = 0; r < spec.output_dim; ++r) y[r] += w.head_b[r];
    return y;
}

ParamVector qlstm_backward(const QlstmSpec& spec, const ParamVector& params,
                           const std::vector<FeatureVector>& sequence,
                           const std::vector<double>& dloss_doutput) {
    const QlstmWeights w = unpack(spec, params);
    check_sequence(spec.seq_len, spec.input_dim, sequence);
    if (dloss_doutput.size() != static_cast<std::size_t>(spec.output_dim))
        throw ValidationError("dloss_doutput length does not match output_dim");

    const std::size_t hd = static_cast<std::size_t>(spec.hidden_dim);
    const std::size_t n = static_cast<std::size_t>(spec.gate_vqc.n_qubits);

    // Forward pass, keeping every step cache.
    std::vector<StepCache> steps;
    steps.reserve(sequence.size());
    std::vector<double> h(hd, 0.0), c(hd, 0.0);
    for (const auto& x : sequence) {
        steps.push_back(run_cell(spec, w, x, h, c));
        h = steps.back().h;
        c = steps.back().c;
    }

    QlstmWeights grad;
    for (int g = 0; g < 4; ++g) {
        grad.gates[g].w_in = Matrix(n, spec.concat_dim());
        grad.gates[g].theta = ParamVector(spec.gate_vqc.param_count(), 0.0);
        grad.gates[g].w_out = Matrix(hd, n);
    }
    grad.head_w = Matrix(spec.output_dim, hd);
    grad.head_b.assign(spec.output_dim, 0.0);

    // Head.
    std::vector<double> dh(hd, 0.0);
    for (int r = 0; r < spec.output_dim; ++r) {
        grad.head_b[r] += dloss_doutput[r];
        for (std::size_t j = 0; j < hd; ++j)
            grad.head_w.at(r, j) += dloss_doutput[r] * h[j];
    }
    dh = mat_t_vec(w.head_w, dloss_doutput);

    std::vector<double> dc(hd, 0.0);
    for (int t = static_cast<int>(steps.size()) - 1; t >= 0; --t) {
        const StepCache& s = steps[t];
        const auto& f = s.act[0];
        const auto& i = s.act[1];
        const auto& u = s.act[2];
        const auto& o = s.act[3];

        std::array<std::vector<double>, 4> dpre;
        for (int g = 0; g < 4; ++g) dpre[g].assign(hd, 0.0);
        for (std::size_t j = 0; j < hd; ++j) {
            const double do_ = dh[j] * s.tanh_c[j];
            dc[j] += dh[j] * o[j] * (1.0 - s.tanh_c[j] * s.tanh_c[j]);
            dpre[0][j] = dc[j] * s.c_prev[j] * f[j] * (1.0 - f[j]);
            dpre[1][j] = dc[j] * u[j] * i[j] * (1.0 - i[j]);
            dpre[2][j] = dc[j] * i[j] * (1.0 - u[j] * u[j]);
            dpre[3][j] = do_ * o[j] * (1.0 - o[j]);
        }

        std::vector<double> dv(s.v.size(), 0.0);
        for (int g = 0; g < 4; ++g) {
            // Through w_out.
            for (std::size_t j = 0; j < hd; ++j)
                for (std::size_t q = 0; q < n; ++q)
                    grad.gates[g].w_out.at(j, q) += dpre[g][j] * s.z[g][q];
            const std::vector<double> dz = mat_t_vec(w.gates[g].w_out, dpre[g]);

            // Through the VQC: parameter-shift Jacobians wrt angles and
            // encoding inputs.
            const auto j_theta = vqc::jacobian_params(spec.gate_vqc, w.gates[g].theta, s.a[g]);
            const auto j_a = vqc::jacobian_features(spec.gate_vqc, w.gates[g].theta, s.a[g]);
            for (std::size_t q = 0; q < n; ++q) {
                for (std::size_t k = 0; k < grad.gates[g].theta.size(); ++k)
                    grad.gates[g].theta[k] += dz[q] * j_theta[q][k];
            }
            std::vector<double> da(n, 0.0);
            for (std::size_t q = 0; q < n; ++q)
                for (std::size_t m = 0; m < n; ++m) da[m] += dz[q] * j_a[q][m];

            // Through w_in.
            for (std::size_t q = 0; q < n; ++q)
                for (std::size_t k = 0; k < s.v.size(); ++k)
                    grad.gates[g].w_in.at(q, k) += da[q] * s.v[k];
            const std::vector<double> dv_g = mat_t_vec(w.gates[g].w_in, da);
            for (std::size_t k = 0; k < dv.size(); ++k) dv[k] += dv_g[k];
        }

        // Split dv: the x part is discarded, the h part flows to step t-1.
        for (std::size_t j = 0; j < hd; ++j) dh[j] = dv[spec.input_dim + j];
        for (std::size_t j = 0; j < hd; ++j) dc[j] *= f[j];
    }

    return pack(spec, grad);
}

ParamVector qlstm_init(const QlstmSpec& spec, std::uint64_t seed) {
    spec.validate();
    Rng rng(seed);
    QlstmWeights w;
    const std::size_t n = static_cast<std::size_t>(spec.gate_vqc.n_qubits);
    const std::size_t hd = static_cast<std::size_t>(spec.hidden_dim);
    const double s_in = 1.0 / std::sqrt(static_cast<double>(spec.concat_dim()));
    const double s_out = 1.0 / std::sqrt(static_cast<double>(n));
    const double s_head = 1.0 / std::sqrt(static_cast<double>(hd));
    for (int g = 0; g < 4; ++g) {
        w.gates[g].w_in = Matrix(n, spec.concat_dim());
        for (auto& v : w.gates[g].w_in.data) v = rng.uniform(-s_in, s_in);
        w.gates[g].theta = ParamVector(spec.gate_vqc.param_count());
        for (auto& v : w.gates[g].theta) v = rng.uniform(-0.1, 0.1);
        w.gates[g].w_out = Matrix(hd, n);
        for (auto& v : w.gates[g].w_out.data) v = rng.uniform(-s_out, s_out);
    }
    w.head_w = Matrix(spec.output_dim, hd);
    for (auto& v : w.head_w.data) v = rng.uniform(-s_head, s_head);
    w.head_b.assign(spec.output_dim, 0.0);
    return pack(spec, w);
}

// ---- classical baseline ----------------------------------------------------

namespace {

struct LstmWeights {
    std::array<Matrix, 4> gate_w; // hidden x concat
    Matrix head_w;
    std::vector<double> head_b;
};

LstmWeights lstm_unpack(const ClassicalLstmSpec& spec, const ParamVector& params) {
    spec.validate();
    if (params.size() != spec.param_count())
        throw ValidationError("LSTM parameter vector has wrong length");
    const std::size_t hd = static_cast<std::size_t>(spec.hidden_dim);
    const std::size_t cd = spec.concat_dim();
    const std::size_t od = static_cast<std::size_t>(spec.output_dim);
    LstmWeights w;
    std::size_t pos = 0;
    const auto take = [&](std::size_t count) {
        const std::size_t start = pos;
        pos += count;
        return std::vector<double>(params.begin() + start, params.begin() + pos);
    };
    for (int g = 0; g < 4; ++g) {
        w.gate_w[g] = Matrix(hd, cd);
        w.gate_w[g].data = take(hd * cd);
    }
    w.head_w = Matrix(od, hd);
    w.head_w.data = take(od * hd);
    w.head_b = take(od);
    return w;
}

ParamVector lstm_pack(const ClassicalLstmSpec& spec, const LstmWeights& w) {
    ParamVector out;
    out.reserve(spec.param_count());
    for (int g = 0; g < 4; ++g)
        out.insert(out.end(), w.gate_w[g].data.begin(), w.gate_w[g].data.end());
    out.insert(out.end(), w.head_w.data.begin(), w.head_w.data.end());
    out.insert(out.end(), w.head_b.begin(), w.head_b.end());
    return out;
}

struct LstmStep {
    std::vector<double> v;
    std::array<std::vector<double>, 4> act;
    std::vector<double> c_prev, c, tanh_c, h;
};

LstmStep lstm_cell(const ClassicalLstmSpec& spec, const LstmWeights& w, const FeatureVector& x,
                   const std::vector<double>& h_prev, const std::vector<double>& c_prev) {
    LstmStep s;
    s.v = concat(x, h_prev);
    s.c_prev = c_prev;
    const std::size_t hd = static_cast<std::size_t>(spec.hidden_dim);
    std::array<std::vector<double>, 4> pre;
    for (int g = 0; g < 4; ++g) pre[g] = mat_vec(w.gate_w[g], s.v);
    for (int g = 0; g < 4; ++g) s.act[g].resize(hd);
    s.c.resize(hd);
    s.tanh_c.resize(hd);
    s.h.resize(hd);
    for (std::size_t j = 0; j < hd; ++j) {
        s.act[0][j] = sigmoid(pre[0][j]);
        s.act[1][j] = sigmoid(pre[1][j]);
        s.act[2][j] = std::tanh(pre[2][j]);
        s.act[3][j] = sigmoid(pre[3][j]);
        s.c[j] = s.act[0][j] * c_prev[j] + s.act[1][j] * s.act[2][j];
        s.tanh_c[j] = std::tanh(s.c[j]);
        s.h[j] = s.act[3][j] * s.tanh_c[j];
    }
    return s;
}

} // namespace

void ClassicalLstmSpec::validate() const {
    if (input_dim < 1 || hidden_dim < 1 || seq_len < 1 || output_dim < 1)
        throw ValidationError("ClassicalLstmSpec: dimensions must be >= 1");
}

std::size_t ClassicalLstmSpec::param_count() const {
    return 4 * static_cast<std::size_t>(hidden_dim) * concat_dim() +
           static_cast<std::size_t>(output_dim) * static_cast<std::size_t>(hidden_dim) +
           static_cast<std::size_t>(output_dim);
}

std::vector<double> lstm_forward(const ClassicalLstmSpec& spec, const ParamVector& params,
                                 const std::vector<FeatureVector>& sequence) {
    const LstmWeights w = lstm_unpack(spec, params);
    check_sequence(spec.seq_len, spec.input_dim, sequence);
    std::vector<double> h(spec.hidden_dim, 0.0), c(spec.hidden_dim, 0.0);
    for (const auto& x : sequence) {
        const LstmStep s = lstm_cell(spec, w, x, h, c);
        h = s.h;
        c = s.c;
    }
    std::vector<double> y = mat_vec(w.head_w, h);
    for (int r = 0; r < spec.output_dim; ++r) y[r] += w.head_b[r];
    return y;
}

ParamVector lstm_backward(const ClassicalLstmSpec& spec, const ParamVector& params,
                          const std::vector<FeatureVector>& sequence,
                          const std::vector<double>& dloss_doutput) {
    const LstmWeights w = lstm_unpack(spec, params);
    check_sequence(spec.seq_len, spec.input_dim, sequence);
    if (dloss_doutput.size() != static_cast<std::size_t>(spec.output_dim))
        throw ValidationError("dloss_doutput length does not match output_dim");
    const std::size_t hd = static_cast<std::size_t>(spec.hidden_dim);

    std::vector<LstmStep> steps;
    steps.reserve(sequence.size());
    std::vector<double> h(hd, 0.0), c(hd, 0.0);
    for (const auto& x : sequence) {
        steps.push_back(lstm_cell(spec, w, x, h, c));
        h = steps.back().h;
        c = steps.back().c;
    }

    LstmWeights grad;
    for (int g = 0; g < 4; ++g) grad.gate_w[g] = Matrix(hd, spec.concat_dim());
    grad.head_w = Matrix(spec.output_dim, hd);
    grad.head_b.assign(spec.output_dim, 0.0);

    std::vector<double> dh(hd, 0.0);
    for (int r = 0; r < spec.output_dim; ++r) {
        grad.head_b[r] += dloss_doutput[r];
        for (std::size_t j = 0; j < hd; ++j)
            grad.head_w.at(r, j) += dloss_doutput[r] * h[j];
    }
    dh = mat_t_vec(w.head_w, dloss_doutput);

    std::vector<double> dc(hd, 0.0);
    for (int t = static_cast<int>(steps.size()) - 1; t >= 0; --t) {
        const LstmStep& s = steps[t];
        const auto& f = s.act[0];
        const auto& i = s.act[1];
        const auto& u = s.act[2];
        const auto& o = s.act[3];
        std::array<std::vector<double>, 4> dpre;
        for (int g = 0; g < 4; ++g) dpre[g].assign(hd, 0.0);
        for (std::size_t j = 0; j < hd; ++j) {
            const double do_ = dh[j] * s.tanh_c[j];
            dc[j] += dh[j] * o[j] * (1.0 - s.tanh_c[j] * s.tanh_c[j]);
            dpre[0][j] = dc[j] * s.c_prev[j] * f[j] * (1.0 - f[j]);
            dpre[1][j] = dc[j] * u[j] * i[j] * (1.0 - i[j]);
            dpre[2][j] = dc[j] * i[j] * (1.0 - u[j] * u[j]);
            dpre[3][j] = do_ * o[j] * (1.0 - o[j]);
        }
        std::vector<double> dv(s.v.size(), 0.0);
        for (int g = 0; g < 4; ++g) {
            for (std::size_t j = 0; j < hd; ++j)
                for (std::size_t k = 0; k < s.v.size(); ++k)
                    grad.gate_w[g].at(j, k) += dpre[g][j] * s.v[k];
            const std::vector<double> dv_g = mat_t_vec(w.gate_w[g], dpre[g]);
            for (std::size_t k = 0; k < dv.size(); ++k) dv[k] += dv_g[k];
        }
        for (std::size_t j = 0; j < hd; ++j) dh[j] = dv[spec.input_dim + j];
        for (std::size_t j = 0; j < hd; ++j) dc[j] *= f[j];
    }
    return lstm_pack(spec, grad);
}

ParamVector lstm_init(const ClassicalLstmSpec& spec, std::uint64_t seed) {
    spec.validate();
    Rng rng(seed);
    LstmWeights w;
    const double s_gate = 1.0 / std::sqrt(static_cast<double>(spec.concat_dim()));
    const double s_head = 1.0 / std::sqrt(static_cast<double>(spec.hidden_dim));
    for (int g = 0; g < 4; ++g) {
        w.gate_w[g] = Matrix(spec.hidden_dim, spec.concat_dim());
        for (auto& v : w.gate_w[g].data) v = rng.uniform(-s_gate, s_gate);
    }
    w.head_w = Matrix(spec.output_dim, spec.hidden_dim);
    for (auto& v : w.head_w.data) v = rng.uniform(-s_head, s_head);
    w.head_b.assign(spec.output_dim, 0.0);
    return lstm_pack(spec, w);
}

} // namespace qfl::qlstm
