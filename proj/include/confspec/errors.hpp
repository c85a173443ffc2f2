#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace confspec {

/// A coefficient of a weak form evaluated to NaN or infinity.
class NonFiniteCoefficient : public std::runtime_error {
public:
    NonFiniteCoefficient(const std::string& what, std::size_t node)
        : std::runtime_error(what + " (node " + std::to_string(node) + ")"), node_(node) {}
    std::size_t node() const noexcept { return node_; }

private:
    std::size_t node_;
};

/// Banded factorization hit a zero (LU) or non-positive (Cholesky) pivot.
class FactorizationError : public std::runtime_error {
public:
    FactorizationError(const std::string& what, std::size_t pivot)
        : std::runtime_error(what + " at pivot " + std::to_string(pivot)), pivot_(pivot) {}
    std::size_t pivot() const noexcept { return pivot_; }

private:
    std::size_t pivot_;
};

/// Iterative eigensolver stopped at its iteration cap.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double residual)
        : std::runtime_error(what + " (achieved residual " + std::to_string(residual) + ")"),
          residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

}  // namespace confspec
