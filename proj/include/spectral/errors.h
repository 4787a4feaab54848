#ifndef SPECTRAL_ERRORS_H_
#define SPECTRAL_ERRORS_H_

#include <stdexcept>
#include <string>

namespace spectral {

// Invalid configuration or violated precondition (CLI exit code 1).
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Function evaluated outside its domain or at a non-finite value.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// Input data could not be read or parsed (CLI exit code 2).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure during a computation (CLI exit code 3).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

class EstimationError : public NumericError {
 public:
  explicit EstimationError(const std::string& what) : NumericError(what) {}
};

class DegenerateDistributionError : public NumericError {
 public:
  explicit DegenerateDistributionError(const std::string& what)
      : NumericError(what) {}
};

class InfiniteVarianceError : public NumericError {
 public:
  explicit InfiniteVarianceError(const std::string& what)
      : NumericError(what) {}
};

}  // namespace spectral

#endif  // SPECTRAL_ERRORS_H_
