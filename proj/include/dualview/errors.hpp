#pragma once

#include <stdexcept>
#include <string>

namespace dualview {

// Shape/dimension violations in tensor ops.
struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A vector with (near-)zero norm where a direction is required.
struct DegenerateVectorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Caller broke a documented precondition.
struct ContractError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid configuration values.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed on-disk data.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Files that parse but do not agree with their sidecar/manifest.
struct IntegrityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite value produced by a forward op.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainingDivergedError : std::runtime_error {
  long long step;
  TrainingDivergedError(long long step_index, const std::string& what)
      : std::runtime_error(what), step(step_index) {}
};

}  // namespace dualview
