#pragma once

#include <stdexcept>
#include <string>

namespace sdecv {

/// Caller broke a documented precondition (sizes, counts, ranges).
class PreconditionError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Dimensions or grids of two collaborating objects do not match.
class ContractViolation : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

/// Non-finite or otherwise unusable numerical input data.
class DataError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

class UnsupportedOperation : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Planner inputs violate the feasibility constraints of the complexity solution.
class PlanError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Configuration problem (unknown model key, malformed value, bad range).
class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace sdecv
