#pragma once

#include <stdexcept>
#include <string>

namespace svarkit {

enum class ErrorKind {
  IoError,
  ParseError,
  ShapeError,
  DomainError,
  InsufficientData,
  SingularRegressors,
  InvalidOrder,
  EmptySelection,
  NotPositiveDefinite,
  NearUnitRoot,
  WeakInstrument,
  NegativeDf,
  InfeasibleRestrictions,
  TooManyRestrictions,
  DegenerateVariance,
  SingularImpact,
  RankDeficient,
  NonInvertibleLoading,
  DegenerateSubset,
  NonConvergence,
  DegenerateSeries,
  UnstableDgp,
  ReplicateFailure,
};

/// Stable name of an error kind; the CLI reports it verbatim.
const char* kind_name(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  const char* name() const noexcept { return kind_name(kind_); }

 private:
  ErrorKind kind_;
};

/// Cell-level CSV failure. Row and column are 1-based file coordinates.
class ParseError : public Error {
 public:
  ParseError(std::size_t row, std::size_t col, const std::string& what)
      : Error(ErrorKind::ParseError, what), row_(row), col_(col) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t col() const noexcept { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool ok, ErrorKind kind, const std::string& what) {
  if (!ok) fail(kind, what);
}

}  // namespace svarkit
