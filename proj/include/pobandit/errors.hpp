#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pobandit {

enum class ErrorKind {
  NotPositiveDefinite,
  DimensionMismatch,
  ConvergenceFailure,
  InvalidDispersion,
  InvalidArgument,
  InvalidDims,
  EmptyDataset,
  ParseError,
  MissingLabel,
  NonNumericFeature,
  NonConvergence,
  InvalidConfig,
  IoError,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace pobandit
