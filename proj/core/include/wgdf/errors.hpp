#pragma once

#include <stdexcept>
#include <string>

namespace wgdf {

// Base class for all library errors. `kind()` is a stable short tag; the
// CLI prints it as a machine-parseable prefix.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

// A shape/value precondition of an operation or type was violated.
class ContractError : public Error {
 public:
  explicit ContractError(const std::string& w) : Error("contract", w) {}
};

// An op produced a NaN/Inf result.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& w) : Error("numeric", w) {}
};

// Invalid run/model configuration.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& w) : Error("config", w) {}
};

// File or directory problem (missing, malformed, truncated).
class IoError : public Error {
 public:
  explicit IoError(const std::string& w) : Error("io", w) {}
};

// Failure inside a training run (non-finite loss/gradient, bad step).
class TrainError : public Error {
 public:
  explicit TrainError(const std::string& w) : Error("train", w) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ContractError(msg);
}

}  // namespace wgdf
