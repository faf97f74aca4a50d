#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace covertmimo {

// Bad input to a public operation (shape, range, unit-norm, ordering).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A factorization or eigensolve failed, or a matrix was numerically singular.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// W_b carries no gain but power was requested.
class DegenerateChannel : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Null steering with (nearly) parallel directions.
class DegenerateGeometry : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Closed form requested outside its domain (e.g. nM <= 2 delta^2).
class InvalidRegime : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> last_residuals)
      : std::runtime_error(what), residuals_(std::move(last_residuals)) {}

  const std::vector<double>& residuals() const noexcept { return residuals_; }

 private:
  std::vector<double> residuals_;
};

}  // namespace covertmimo
