#pragma once

#include <stdexcept>
#include <string>

namespace texloss {

// Root of the library's exception hierarchy.  Every failure the library
// raises on purpose derives from Error, so callers can catch one type at
// the boundary and map it to a diagnostic + nonzero exit code.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Unreadable or malformed input files (image headers, sidecars, CSV).
class ParseError : public Error {
 public:
  enum class Kind {
    MalformedHeader,
    TruncatedData,
    MissingSidecar,
    BadSidecar,
    BadCsv,
  };

  ParseError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Filesystem-level failures (cannot open / write a path).
class IoError : public Error {
 public:
  using Error::Error;
};

// Saving to an integer format would clip: some value falls outside
// [0, maxval] before rounding.
class RangeOverflowError : public Error {
 public:
  using Error::Error;
};

// A co-occurrence matrix has no valid pixel pairs (displacement larger
// than the image), so it cannot be normalized.
class DegenerateGlcmError : public Error {
 public:
  using Error::Error;
};

// A descriptor is mathematically undefined for the given matrix, e.g.
// correlation when a marginal variance is zero.
class UndefinedDescriptorError : public Error {
 public:
  using Error::Error;
};

// A kernel density estimate cannot be formed (fewer than two samples or
// zero sample variance, which makes the bandwidth collapse).
class DegenerateKdeError : public Error {
 public:
  using Error::Error;
};

// An optimization run produced a non-finite objective or iterate.
class DivergedError : public Error {
 public:
  DivergedError(int step, const std::string& what) : Error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

// A computation produced a non-finite intermediate outside optimization
// (e.g. overflowing attention logits).
class NumericError : public Error {
 public:
  using Error::Error;
};

// Operands disagree on shape, bin grid, offset grid, or descriptor kind.
class MismatchError : public Error {
 public:
  using Error::Error;
};

// Invalid argument values (non-positive sizes, bad enum strings, ...).
class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

}  // namespace texloss
