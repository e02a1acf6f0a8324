#pragma once

#include <stdexcept>
#include <string>

namespace sorkin {

// Input-class errors map to CLI exit code 2, domain-class errors to exit 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual bool is_domain_error() const noexcept { return false; }
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

class IncompleteDataError : public Error {
 public:
  using Error::Error;
};

class UndefinedNormalizationError : public Error {
 public:
  using Error::Error;
};

class ModelError : public Error {
 public:
  using Error::Error;
};

class SingularFitError : public Error {
 public:
  SingularFitError(const std::string& what, double condition_number)
      : Error(what), condition_number_(condition_number) {}
  double condition_number() const noexcept { return condition_number_; }

 private:
  double condition_number_;
};

class FitFailureError : public Error {
 public:
  using Error::Error;
};

class UnderdeterminedError : public Error {
 public:
  using Error::Error;
};

class UndefinedCorrelationError : public Error {
 public:
  UndefinedCorrelationError(const std::string& what, std::size_t index)
      : Error(what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class DomainError : public Error {
 public:
  using Error::Error;
  bool is_domain_error() const noexcept override { return true; }
};

class SaturationError : public Error {
 public:
  using Error::Error;
  bool is_domain_error() const noexcept override { return true; }
};

}  // namespace sorkin
