#pragma once

#include <stdexcept>
#include <string>

namespace roomflow {

// Base of every error the library raises. Each subclass corresponds to one
// failure class callers are expected to distinguish.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define ROOMFLOW_ERROR(Name)           \
  class Name : public Error {          \
   public:                             \
    using Error::Error;                \
  }

ROOMFLOW_ERROR(FormatError);
ROOMFLOW_ERROR(UnsupportedError);
ROOMFLOW_ERROR(IoError);
ROOMFLOW_ERROR(ConfigError);
ROOMFLOW_ERROR(RateError);
ROOMFLOW_ERROR(ResourceError);
ROOMFLOW_ERROR(DegenerateError);
ROOMFLOW_ERROR(InsufficientDecayError);
ROOMFLOW_ERROR(EstimationError);
ROOMFLOW_ERROR(SilenceError);
ROOMFLOW_ERROR(LengthError);
ROOMFLOW_ERROR(ShapeError);
ROOMFLOW_ERROR(SampleDivergedError);

#undef ROOMFLOW_ERROR

class TrainingDivergedError : public Error {
 public:
  TrainingDivergedError(const std::string& what, long step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

}  // namespace roomflow
