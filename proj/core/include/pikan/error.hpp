#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pikan {

// Root of the library's exception hierarchy. ValidationError covers bad
// inputs (data, config, shapes); everything else is a runtime failure. The
// CLI maps the two branches onto exit codes 1 and 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

#define PIKAN_DEFINE_ERROR(Name, Base)   \
  class Name : public Base {             \
   public:                               \
    using Base::Base;                    \
  }

// marketdata
PIKAN_DEFINE_ERROR(MissingColumn, ValidationError);
PIKAN_DEFINE_ERROR(NonMonotonicDates, ValidationError);
PIKAN_DEFINE_ERROR(SeriesTooShort, ValidationError);
PIKAN_DEFINE_ERROR(InsufficientHistory, ValidationError);
PIKAN_DEFINE_ERROR(AssetDateMismatch, ValidationError);

class UnparseableRow : public ValidationError {
 public:
  UnparseableRow(std::size_t line, const std::string& why)
      : ValidationError("line " + std::to_string(line) + ": " + why), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// env
PIKAN_DEFINE_ERROR(NonPositivePrice, ValidationError);
PIKAN_DEFINE_ERROR(InvalidWeights, ValidationError);
PIKAN_DEFINE_ERROR(EpisodeTerminated, Error);

// shapes
PIKAN_DEFINE_ERROR(DimensionMismatch, ValidationError);
PIKAN_DEFINE_ERROR(ShapeMismatch, ValidationError);
PIKAN_DEFINE_ERROR(LengthMismatch, ValidationError);

// agents
PIKAN_DEFINE_ERROR(BufferTooSmall, Error);
PIKAN_DEFINE_ERROR(EmptyRollout, Error);

// metrics
PIKAN_DEFINE_ERROR(InsufficientData, ValidationError);
PIKAN_DEFINE_ERROR(ZeroVolatility, Error);
PIKAN_DEFINE_ERROR(ZeroDrawdown, Error);

// cli
PIKAN_DEFINE_ERROR(ConfigError, ValidationError);
PIKAN_DEFINE_ERROR(UnknownStrategy, ValidationError);
PIKAN_DEFINE_ERROR(MissingReport, ValidationError);
PIKAN_DEFINE_ERROR(CheckpointShapeMismatch, ValidationError);

#undef PIKAN_DEFINE_ERROR

}  // namespace pikan
