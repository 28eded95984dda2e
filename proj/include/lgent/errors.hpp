#pragma once

#include <stdexcept>
#include <string>

namespace lgent {

// Base class for all library errors. Stage/operation names are embedded in
// the message by the thrower.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// group_core
struct ChartViolation : Error {
  using Error::Error;
};
struct OutsideChart : Error {
  using Error::Error;
};

// linear_system
struct ControlOutOfRange : Error {
  using Error::Error;
};
struct WordTooShort : Error {
  using Error::Error;
};

// spectral
struct SingularDifferential : Error {
  using Error::Error;
};
struct ConvergenceFailure : Error {
  using Error::Error;
};
struct AmbiguousClassification : Error {
  using Error::Error;
};
struct FitFailure : Error {
  using Error::Error;
};
struct WitnessNotFound : Error {
  using Error::Error;
};

// quotient
struct StableSubgroupNotClosed : Error {
  using Error::Error;
};
struct InvarianceViolated : Error {
  using Error::Error;
};
struct ZeroMeasureK : Error {
  using Error::Error;
};

// entropy
struct NotAdmissibleAtResolution : Error {
  using Error::Error;
};
struct BudgetExceeded : Error {
  using Error::Error;
};
struct InfeasibleCover : Error {
  using Error::Error;
};
struct InsufficientData : Error {
  using Error::Error;
};

// cli_runner
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace lgent
