#include "qfl/vqc.hpp"

#include <cmath>

#include "qfl/rng.hpp"

namespace qfl::vqc {

namespace {

constexpr double kHalfPi = 1.57079632679489661923132169163975144;

std::vector<double> forward_analytic(const VqcSpec& spec, const ParamVector& params,
                                     const FeatureVector& features) {
    const qsim::Circuit circuit = build_vqc(spec, params, features);
    const qsim::Statevector state =
        qsim::run_circuit(circuit, qsim::Statevector::zero(spec.n_qubits));
    return qsim::all_z_expectations(state);
}

} // namespace

void VqcSpec::validate() const {
    if (n_qubits < 1 || n_qubits > qsim::kMaxQubits)
        throw ValidationError("VqcSpec: n_qubits out of range");
    if (n_layers < 0) throw ValidationError("VqcSpec: n_layers must be >= 0");
}

std::size_t param_index(const VqcSpec& spec, int layer, int qubit, int component) {
    return 3u * (static_cast<std::size_t>(layer) * spec.n_qubits + qubit) + component;
}

void validate_params(const VqcSpec& spec, const ParamVector& params) {
    if (params.size() != spec.param_count())
        throw ValidationError("parameter vector length " + std::to_string(params.size()) +
                              " does not match spec count " + std::to_string(spec.param_count()));
    for (double p : params)
        if (!std::isfinite(p)) throw ValidationError("parameter vector contains a non-finite entry");
}

qsim::Circuit build_vqc(const VqcSpec& spec, const ParamVector& params,
                        const FeatureVector& features) {
    spec.validate();
    validate_params(spec, params);
    qsim::Circuit circuit = encoders::angle_encode(features, spec.n_qubits);
    for (int layer = 0; layer < spec.n_layers; ++layer) {
        for (int q = 0; q < spec.n_qubits; ++q) {
            const std::size_t base = param_index(spec, layer, q, 0);
            circuit.append(qsim::Gate::rot(q, params[base], params[base + 1], params[base + 2]));
        }
        if (spec.n_qubits > 1)
            for (int q = 0; q < spec.n_qubits; ++q)
                circuit.append(qsim::Gate::cnot(q, (q + 1) % spec.n_qubits));
    }
    return circuit;
}

std::vector<double> vqc_forward(const VqcSpec& spec, const ParamVector& params,
                                const FeatureVector& features, const ForwardOptions& options) {
    std::vector<double> z;
    if (options.shots) {
        const qsim::Circuit circuit = build_vqc(spec, params, features);
        const qsim::Statevector state =
            qsim::run_circuit(circuit, qsim::Statevector::zero(spec.n_qubits));
        const auto counts = qsim::sample_counts(state, *options.shots, options.seed);
        z = qsim::z_expectations_from_counts(counts, spec.n_qubits, *options.shots);
    } else {
        z = forward_analytic(spec, params, features);
    }
    return qsim::apply_noise(z, options.noise);
}

ParamVector parameter_shift_grad(const VqcSpec& spec, const ParamVector& params,
                                 const FeatureVector& features,
                                 const std::vector<double>& observable_weights,
                                 const ForwardOptions& options) {
    if (options.shots)
        throw UnsupportedModeError("parameter_shift_grad supports analytic mode only");
    spec.validate();
    validate_params(spec, params);
    if (observable_weights.size() != static_cast<std::size_t>(spec.n_qubits))
        throw ValidationError("observable weighting must have one entry per qubit");

    const auto weighted = [&](const ParamVector& p) {
        const auto z = forward_analytic(spec, p, features);
        double f = 0.0;
        for (int q = 0; q < spec.n_qubits; ++q) f += observable_weights[q] * z[q];
        return f;
    };

    ParamVector grad(params.size(), 0.0);
    ParamVector shifted = params;
    for (std::size_t k = 0; k < params.size(); ++k) {
        shifted[k] = params[k] + kHalfPi;
        const double plus = weighted(shifted);
        shifted[k] = params[k] - kHalfPi;
        const double minus = weighted(shifted);
        shifted[k] = params[k];
        grad[k] = 0.5 * (plus - minus);
    }
    return grad;
}

std::vector<std::vector<double>> jacobian_params(const VqcSpec& spec, const ParamVector& params,
                                                 const FeatureVector& features) {
    spec.validate();
    validate_params(spec, params);
    std::vector<std::vector<double>> jac(spec.n_qubits,
                                         std::vector<double>(params.size(), 0.0));
    ParamVector shifted = params;
    for (std::size_t k = 0; k < params.size(); ++k) {
        shifted[k] = params[k] + kHalfPi;
        const auto plus = forward_analytic(spec, shifted, features);
        shifted[k] = params[k] - kHalfPi;
        const auto minus = forward_analytic(spec, shifted, features);
        shifted[k] = params[k];
        for (int q = 0; q < spec.n_qubits; ++q) jac[q][k] = 0.5 * (plus[q] - minus[q]);
    }
    return jac;
}

std::vector<std::vector<double>> jacobian_features(const VqcSpec& spec, const ParamVector& params,
                                                   const FeatureVector& features) {
    spec.validate();
    validate_params(spec, params);
    std::vector<std::vector<double>> jac(spec.n_qubits,
                                         std::vector<double>(features.size(), 0.0));
    FeatureVector shifted = features;
    for (std::size_t i = 0; i < features.size(); ++i) {
        shifted[i] = features[i] + kHalfPi;
        const auto plus = forward_analytic(spec, params, shifted);
        shifted[i] = features[i] - kHalfPi;
        const auto minus = forward_analytic(spec, params, shifted);
        shifted[i] = features[i];
        for (int q = 0; q < spec.n_qubits; ++q) jac[q][i] = 0.5 * (plus[q] - minus[q]);
    }
    return jac;
}

ParamVector sgd_step(const ParamVector& params, const ParamVector& grads, double lr) {
    if (params.size() != grads.size())
        throw ValidationError("sgd_step: parameter and gradient lengths differ");
    if (!(lr >= 0.0) || !std::isfinite(lr))
        throw ValidationError("sgd_step: learning rate must be a nonnegative real");
    ParamVector out(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) out[i] = params[i] - lr * grads[i];
    return out;
}

ParamVector random_init(std::size_t count, std::uint64_t seed, double range) {
    Rng rng(seed);
    ParamVector out(count);
    for (auto& v : out) v = rng.uniform(-range, range);
    return out;
}

} // namespace qfl::vqc
