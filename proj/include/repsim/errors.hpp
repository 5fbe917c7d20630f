#ifndef REPSIM_ERRORS_HPP
#define REPSIM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace repsim {

// Base of everything this library throws on purpose.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad files, bad flags, mismatched inputs. CLI exit code 2.
struct InputError : Error {
  using Error::Error;
};

// Inputs were well-formed but the requested quantity does not exist
// (e.g. a constant layer has no comparable signal). CLI exit code 3.
struct ComputationError : Error {
  using Error::Error;
};

// --- tensor / manifest ingestion ---
struct BadMagic : InputError {
  using InputError::InputError;
};
struct UnsupportedDtype : InputError {
  using InputError::InputError;
};
struct UnsupportedLayout : InputError {
  using InputError::InputError;
};
struct ShapeMismatch : InputError {
  using InputError::InputError;
};
struct NonFinite : InputError {
  using InputError::InputError;
};
struct IoFailure : InputError {
  using InputError::InputError;
};
struct MissingFile : InputError {
  using InputError::InputError;
};
struct InconsistentBatch : InputError {
  using InputError::InputError;
};

// --- similarity metrics ---
struct TooFewRows : InputError {
  using InputError::InputError;
};
struct RowCountMismatch : InputError {
  using InputError::InputError;
};
struct OrderMismatch : InputError {
  using InputError::InputError;
};
// A layer that is constant across examples carries no signal; every metric
// denominator vanishes. Reported per layer index rather than silently as 0.
struct DegenerateInput : ComputationError {
  using ComputationError::ComputationError;
};

// --- aggregation / rendering ---
struct LengthMismatch : InputError {
  using InputError::InputError;
};
struct NotSquare : InputError {
  using InputError::InputError;
};
struct EmptySet : InputError {
  using InputError::InputError;
};

// --- detection evaluation ---
struct UnknownLabel : InputError {
  using InputError::InputError;
};
struct MissingScores : InputError {
  using InputError::InputError;
};

}  // namespace repsim

#endif  // REPSIM_ERRORS_HPP
