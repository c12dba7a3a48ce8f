#include "qfl/encoders.hpp"

#include <cmath>

namespace qfl::encoders {

void validate_features(const FeatureVector& features) {
    for (double v : features)
        if (!std::isfinite(v)) throw ValidationError("feature vector contains a non-finite entry");
}

qsim::Circuit angle_encode(const FeatureVector& features, int n_qubits) {
    validate_features(features);
    if (static_cast<int>(features.size()) != n_qubits)
        throw ValidationError("angle_encode: expected " + std::to_string(n_qubits) +
                              " features, got " + std::to_string(features.size()));
    qsim::Circuit prefix(n_qubits, {});
    for (int q = 0; q < n_qubits; ++q) prefix.append(qsim::Gate::rx(q, features[q]));
    return prefix;
}

qsim::Statevector amplitude_encode(const FeatureVector& features, int n_qubits) {
    validate_features(features);
    const std::size_t dim = 1ULL << n_qubits;
    if (features.size() > dim)
        throw ValidationError("amplitude_encode: more features than amplitudes");
    double norm_sq = 0.0;
    for (double v : features) norm_sq += v * v;
    if (norm_sq == 0.0)
        throw ValidationError("amplitude_encode: all-zero input has no normalizable state");
    const double inv_norm = 1.0 / std::sqrt(norm_sq);
    std::vector<qsim::Complex> amps(dim, qsim::Complex(0, 0));
    for (std::size_t i = 0; i < features.size(); ++i) amps[i] = features[i] * inv_norm;
    return qsim::Statevector(n_qubits, std::move(amps));
}

qsim::Statevector basis_encode(const std::vector<std::uint8_t>& bits) {
    if (bits.empty()) throw ValidationError("basis_encode: empty bit sequence");
    for (auto b : bits)
        if (b > 1) throw ValidationError("basis_encode: bits must be 0 or 1");
    const int n = static_cast<int>(bits.size());
    std::uint64_t index = 0;
    for (int i = 0; i < n; ++i)
        if (bits[i]) index |= 1ULL << i;
    std::vector<qsim::Complex> amps(1ULL << n, qsim::Complex(0, 0));
    amps[index] = qsim::Complex(1, 0);
    return qsim::Statevector(n, std::move(amps));
}

} // namespace qfl::encoders
