#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace istq {

// Every error raised by the library derives from this, so callers can catch
// physics failures without also swallowing std::bad_alloc and friends.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the domain of a physical formula (L <= 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Series-inductance branch whose phi(phi_d) map is not monotone.
class InvertibilityError : public Error {
 public:
  InvertibilityError(const std::string& what, double k_gamma_over_beta)
      : Error(what), ratio_(k_gamma_over_beta) {}
  double k_gamma_over_beta() const noexcept { return ratio_; }

 private:
  double ratio_;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Stationary point with an indefinite Hessian: double well or saddle.
class DoubleWellError : public Error {
 public:
  DoubleWellError(const std::string& what, double phi_x)
      : Error(what), phi_x_(phi_x) {}
  double phi_x() const noexcept { return phi_x_; }

 private:
  double phi_x_;
};

class UnsupportedVariantError : public Error {
 public:
  using Error::Error;
};

// Exact eigenstate could not be assigned a bare (n_q, n_r) label.
class LabelingError : public Error {
 public:
  using Error::Error;
};

class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, std::vector<std::string> binding)
      : Error(what), binding_(std::move(binding)) {}
  const std::vector<std::string>& binding_constraints() const noexcept { return binding_; }

 private:
  std::vector<std::string> binding_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace istq
