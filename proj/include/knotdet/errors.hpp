#pragma once

#include <stdexcept>
#include <string>

namespace knotdet {

/// Bad arguments or values violating a documented invariant. CLI exit code 1.
class InvalidInputError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Unreadable/unwritable files, schema violations in input documents. CLI exit code 2.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Numerically unusable inputs (near-singular covariances etc.). CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Optimization blew past the loss ceiling; names the metric and iteration.
class DivergenceError : public NumericalError {
public:
  DivergenceError(const std::string& metric, int iteration)
      : NumericalError("fit diverged with metric " + metric + " at iteration " +
                       std::to_string(iteration)),
        metric_(metric),
        iteration_(iteration) {}

  const std::string& metric() const { return metric_; }
  int iteration() const { return iteration_; }

private:
  std::string metric_;
  int iteration_;
};

}  // namespace knotdet
