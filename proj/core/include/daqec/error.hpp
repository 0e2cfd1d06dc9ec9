#pragma once

#include <stdexcept>
#include <string>

namespace daqec {

enum class ErrorKind {
  InvalidCutoff,
  NumericError,
  ShapeError,
  SpecError,
  CutoffTooSmall,
  CompileError,
  IntegratorError,
  StiffnessError,
  NonuniqueSteadyState,
  RestrictionInvalid,
  EstimateUndefined,
  PerturbationIllPosed,
  NotAProjector,
  NegativeRate,
  RankDeficient,
  ConfigError,
};

const char* to_string(ErrorKind k);

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

}  // namespace daqec
