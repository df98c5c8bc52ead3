#pragma once

#include <stdexcept>
#include <string>

namespace lltomo {

// Root of every error thrown by the library. The CLI maps subclasses onto
// exit codes, so keep the hierarchy flat.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class CapacityError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, double failure_time)
      : Error(what), failure_time_(failure_time) {}
  double failure_time() const noexcept { return failure_time_; }

 private:
  double failure_time_;
};

class DegenerateAsymptoticsError : public Error {
 public:
  using Error::Error;
};

class SingularFrameError : public Error {
 public:
  using Error::Error;
};

class ResolutionError : public Error {
 public:
  ResolutionError(const std::string& what, std::size_t required_points)
      : Error(what), required_points_(required_points) {}
  std::size_t required_points() const noexcept { return required_points_; }

 private:
  std::size_t required_points_;
};

// Numerical budget exhausted (quadrature evaluations, MC stderr target).
class BudgetError : public Error {
 public:
  BudgetError(const std::string& what, double achieved)
      : Error(what), achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

class SamplerError : public Error {
 public:
  using Error::Error;
};

}  // namespace lltomo
