#pragma once

#include <stdexcept>
#include <string>

namespace sadiv {

// Input that violates a documented precondition or file-format contract.
// The CLI maps this to exit code 1.
class InvalidInput : public std::invalid_argument {
 public:
  explicit InvalidInput(const std::string& msg) : std::invalid_argument(msg) {}
};

// Failure inside an otherwise well-posed computation: non-convergence,
// PD certification failure, solver cycling. The CLI maps this to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace sadiv
