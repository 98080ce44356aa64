#include "gapdecomp/error.hpp"

namespace gapdecomp {

std::string_view code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingColumn: return "MISSING_COLUMN";
    case ErrorCode::NonNumericOutcome: return "NON_NUMERIC_OUTCOME";
    case ErrorCode::EmptyDataset: return "EMPTY_DATASET";
    case ErrorCode::MalformedCsv: return "MALFORMED_CSV";
    case ErrorCode::NestingViolation: return "NESTING_VIOLATION";
    case ErrorCode::UnknownReference: return "UNKNOWN_REFERENCE";
    case ErrorCode::SingletonPopulation: return "SINGLETON_POPULATION";
    case ErrorCode::ZeroVariance: return "ZERO_VARIANCE";
    case ErrorCode::WrongShape: return "WRONG_SHAPE";
    case ErrorCode::InvalidConfig: return "INVALID_CONFIG";
    case ErrorCode::MalformedInput: return "MALFORMED_INPUT";
    case ErrorCode::EmptyGroup: return "EMPTY_GROUP";
    case ErrorCode::RankDeficient: return "RANK_DEFICIENT";
    case ErrorCode::Singular: return "SINGULAR";
    case ErrorCode::TooFewClusters: return "TOO_FEW_CLUSTERS";
    case ErrorCode::NoWithinVariance: return "NO_WITHIN_VARIANCE";
    case ErrorCode::IncompleteParameters: return "INCOMPLETE_PARAMETERS";
    case ErrorCode::DegenerateTotal: return "DEGENERATE_TOTAL";
  }
  return "UNKNOWN";
}

bool is_estimation_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::RankDeficient:
    case ErrorCode::Singular:
    case ErrorCode::TooFewClusters:
    case ErrorCode::NoWithinVariance:
    case ErrorCode::IncompleteParameters:
    case ErrorCode::DegenerateTotal:
      return true;
    default:
      return false;
  }
}

}  // namespace gapdecomp
