// errors.hpp — Exception types shared by all qdiss modules

#pragma once

#include <stdexcept>
#include <string>

namespace qdiss {

// Operand shapes do not agree (non-square matrix, mismatched dimensions).
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Input that violates a documented precondition (non-Hermitian operator,
// negative friction, bad trace, out-of-domain bath energy, ...).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A density matrix eigenvalue is below the floor required by ln(rho) or the
// log-mean kernel.
class PositivityError : public std::runtime_error {
public:
    PositivityError(const std::string& what, double min_eigenvalue)
        : std::runtime_error(what), min_eigenvalue_(min_eigenvalue) {}

    double min_eigenvalue() const noexcept { return min_eigenvalue_; }

private:
    double min_eigenvalue_;
};

class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace qdiss
