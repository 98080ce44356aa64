#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gapdecomp {

enum class ErrorCode {
  // input / validation
  MissingColumn,
  NonNumericOutcome,
  EmptyDataset,
  MalformedCsv,
  NestingViolation,
  UnknownReference,
  SingletonPopulation,
  ZeroVariance,
  WrongShape,
  InvalidConfig,
  MalformedInput,
  EmptyGroup,
  // numerical / estimation
  RankDeficient,
  Singular,
  TooFewClusters,
  NoWithinVariance,
  IncompleteParameters,
  DegenerateTotal,
};

// Stable machine-readable name, e.g. "NESTING_VIOLATION".
std::string_view code_name(ErrorCode code);

// True for errors caused by the numbers rather than by the input.
bool is_estimation_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gapdecomp
