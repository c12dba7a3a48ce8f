#ifndef QFL_ERRORS_HPP
#define QFL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace qfl {

// Caller handed us something invalid (bad config value, empty input,
// mismatched lengths at an API boundary).
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// An internal contract was broken (qubit index out of range, payload
// length inconsistent with the model it updates).
class StructuralError : public std::logic_error {
public:
    explicit StructuralError(const std::string& what) : std::logic_error(what) {}
};

// A requested combination of features is not supported in this version
// (e.g. parameter-shift gradients in shot mode).
class UnsupportedModeError : public std::runtime_error {
public:
    explicit UnsupportedModeError(const std::string& what) : std::runtime_error(what) {}
};

// Envelope failed to open: wrong key or tampered bytes.
class AuthenticationError : public std::runtime_error {
public:
    explicit AuthenticationError(const std::string& what) : std::runtime_error(what) {}
};

// Raised by accuracy-weighted aggregation when every client reported zero
// accuracy; the caller is expected to fall back to plain FedAvg.
class AllAccuraciesZeroError : public std::runtime_error {
public:
    AllAccuraciesZeroError() : std::runtime_error("all reported accuracies are zero") {}
};

} // namespace qfl

#endif
