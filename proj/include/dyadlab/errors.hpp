#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace dyadlab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Cube address outside the tree.
class AddressError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// Eigen-solver failure, non-finite values, or a matrix that should be PSD but is not.
class NumericError : public Error {
 public:
  using Error::Error;
};

class SingularityError : public NumericError {
 public:
  SingularityError(const std::string& what, double lambda_min)
      : NumericError(what), lambda_min_(lambda_min) {}

  double lambda_min() const noexcept { return lambda_min_; }

 private:
  double lambda_min_;
};

class DomainError : public Error {
 public:
  DomainError(const std::string& what, double margin)
      : Error(what), margin_(margin) {}

  double margin() const noexcept { return margin_; }

 private:
  double margin_;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace dyadlab
