#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace rowsplit {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not conform.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A triangular solve met a zero or missing diagonal entry.
class SingularError : public Error {
 public:
  using Error::Error;
};

/// Dense Cholesky met a non-positive pivot.
class NotSpdError : public Error {
 public:
  NotSpdError(const std::string& what, std::int64_t pivot)
      : Error(what), pivot_(pivot) {}
  std::int64_t pivot() const noexcept { return pivot_; }

 private:
  std::int64_t pivot_;
};

/// A file could not be opened.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Matrix Market text could not be parsed or uses an unsupported variant.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Column scaling met an all-zero column.
class ZeroColumnError : public Error {
 public:
  ZeroColumnError(const std::string& what, std::int64_t column)
      : Error(what), column_(column) {}
  std::int64_t column() const noexcept { return column_; }

 private:
  std::int64_t column_;
};

/// A complete factorization needed pivot modification, so A is numerically
/// rank deficient.
class RankDeficientError : public Error {
 public:
  using Error::Error;
};

/// The dense (m-n)x(m-n) matrix would exceed the configured size cap.
class SizeCapError : public Error {
 public:
  using Error::Error;
};

/// Adding a row broke positive definiteness of the bordered S matrix; the
/// preconditioner has to be rebuilt from a fresh factorization.
class UpdateFailedError : public Error {
 public:
  using Error::Error;
};

}  // namespace rowsplit
