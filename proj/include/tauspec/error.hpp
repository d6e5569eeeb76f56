#pragma once

#include <stdexcept>
#include <string>

namespace tauspec {

// Malformed user input: wrong shapes, bad files, out-of-range parameters.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A mathematical precondition failed (non-HPD matrix, unstable model, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Lagrange multiplier outside the admissible set on the quadrature grid.
class AdmissibilityError : public DomainError {
 public:
  AdmissibilityError(int node, double eigenvalue)
      : DomainError("multiplier not admissible: inner matrix eigenvalue " +
                    std::to_string(eigenvalue) + " at node " +
                    std::to_string(node)),
        node_(node),
        eigenvalue_(eigenvalue) {}

  int node() const { return node_; }
  double eigenvalue() const { return eigenvalue_; }

 private:
  int node_;
  double eigenvalue_;
};

// The covariance handed to the dual solver is not in ker V.
class FeasibilityError : public DomainError {
 public:
  using DomainError::DomainError;
};

}  // namespace tauspec
