#include "pobandit/errors.hpp"

namespace pobandit {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::InvalidDispersion: return "InvalidDispersion";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InvalidDims: return "InvalidDims";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::MissingLabel: return "MissingLabel";
    case ErrorKind::NonNumericFeature: return "NonNumericFeature";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

}  // namespace pobandit
