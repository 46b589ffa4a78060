#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace roughwall {

enum class ErrorKind {
  RangeViolation,
  ConjugacyViolation,
  DegenerateMap,
  DomainError,
  QuadratureGuard,
  SupportError,
  SolverDiverged,
  PicardDiverged,
  OutOfDomain,
  SingularFit,
  NonPositiveData,
  DegenerateBox,
  ConfigError
};

const char* kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(kind_name(kind)) + ": " + what), kind_(kind) {}
  Error(ErrorKind kind, const std::string& what, std::vector<double> history)
      : Error(kind, what) {
    history_ = std::move(history);
  }
  ErrorKind kind() const noexcept { return kind_; }
  const std::vector<double>& history() const noexcept { return history_; }

 private:
  ErrorKind kind_;
  std::vector<double> history_;
};

}  // namespace roughwall
