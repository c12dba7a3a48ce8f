#ifndef QFL_ENCODERS_HPP
#define QFL_ENCODERS_HPP

#include <cstdint>
#include <vector>

#include "qfl/qsim.hpp"

namespace qfl::encoders {

// Classical feature values, dimensionless and caller-normalized. Angle
// encoding uses them directly as radians; the harness is the single place
// that scales raw data into [-pi, pi].
using FeatureVector = std::vector<double>;

// Throws ValidationError on NaN or infinity.
void validate_features(const FeatureVector& features);

// One RX(value_i) on qubit i, in index order. Requires one feature per qubit.
qsim::Circuit angle_encode(const FeatureVector& features, int n_qubits);

// Zero-pads to 2^n entries, divides by the Euclidean norm. Rejects the
// all-zero vector, which has no normalizable state.
qsim::Statevector amplitude_encode(const FeatureVector& features, int n_qubits);

// Computational basis state at index sum(bit_i * 2^i), qubit 0 least
// significant.
qsim::Statevector basis_encode(const std::vector<std::uint8_t>& bits);

} // namespace qfl::encoders

#endif
