#ifndef APPTSCHED_ERRORS_HPP
#define APPTSCHED_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace apptsched {

/// Parameter outside its documented range.
class ParameterError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Mode-count mismatch between states that must have equal arity.
class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A theorem's stated validity range was violated (e.g. s < 8 ln n).
class PreconditionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// The inconclusive-rerun budget was exhausted; usually means alpha_out is
/// too small for the channel.
class RerunBudgetError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The k-intersections promise given to the Grover routine was violated.
class PromiseViolationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Two netsim endpoints disagreed on the message round index.
class ProtocolDesyncError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Transport-level failure (socket error, truncated frame, bad payload).
class TransportError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace apptsched

#endif
