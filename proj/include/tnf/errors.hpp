#pragma once

#include <stdexcept>
#include <string>

namespace tnf {

// Error taxonomy shared by all modules. The CLI maps these onto exit codes.

/// Mismatched tensor extents.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed argument (bad index set, non-positive chi, out-of-range spin).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Object used with state it was not built for (e.g. a stale cache).
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Problem size exceeds a guard for exponential-cost routines.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical data violates a documented invariant (trace, zero amplitude...).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Circuit graph is cyclic or otherwise ill-formed.
class StructureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Encoded value cannot be decoded.
class RepresentationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Requested feature outside what the implementation supports.
class UnsupportedFeature : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical run aborted (e.g. diverging optimisation).
class NumericalAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tnf
