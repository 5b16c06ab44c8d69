// Error types shared across the library.
//
// Precondition failures are first-class data here: every analytic bound has
// an applicability window, and callers need to know which inequality failed
// and by how much, not just that "something" went wrong.

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace perturb {

// Invalid arguments (bad index sets, dimension mismatches, bad parameters).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Numerical process failed (eigensolver non-convergence, quadrature budget
// exhausted, power-iteration breakdown).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// A resolvent was requested at a point too close to the spectrum.
class SingularityError : public NumericalError {
 public:
  SingularityError(const std::string& what, double offending_eigenvalue)
      : NumericalError(what), offending_eigenvalue_(offending_eigenvalue) {}
  double offending_eigenvalue() const { return offending_eigenvalue_; }

 private:
  double offending_eigenvalue_;
};

// One checked inequality: `slack` >= 0 means satisfied, negative means the
// amount by which it failed.
struct PreconditionCheck {
  std::string name;
  bool satisfied = false;
  double slack = 0.0;
};

// Thrown when an analytic bound is evaluated outside its applicability
// window.  Carries the failing check(s).
class PreconditionError : public std::runtime_error {
 public:
  PreconditionError(const std::string& what, std::vector<PreconditionCheck> checks)
      : std::runtime_error(what), checks_(std::move(checks)) {}

  const std::vector<PreconditionCheck>& checks() const { return checks_; }

  // First unsatisfied check, by convention the one named in what().
  const PreconditionCheck& failed() const {
    for (const auto& c : checks_)
      if (!c.satisfied) return c;
    return checks_.front();
  }

 private:
  std::vector<PreconditionCheck> checks_;
};

}  // namespace perturb
