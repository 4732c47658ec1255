#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dmr {

using VertexId = uint32_t;
using EdgeId = uint32_t;

inline constexpr EdgeId kNoEdge = UINT32_MAX;
inline constexpr VertexId kNoVertex = UINT32_MAX;

// Error taxonomy. Everything derives from Error so callers can catch broadly;
// the leaf types mirror the failure classes of the public operations.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input object (bad vector shape, non-uniform weights, bad cover...).
class InputError : public Error {
 public:
  using Error::Error;
};

// Scalar parameter out of range (eps outside (0,1), probability outside [0,1]).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// A caller promise was broken (x_min floor, fractional-matching promise).
class PromiseError : public Error {
 public:
  using Error::Error;
};

// Operation not supported for this input class (general graph too large, ...).
class CapabilityError : public Error {
 public:
  using Error::Error;
};

// Edge/vertex referenced that does not exist in the graph.
class StructuralError : public Error {
 public:
  using Error::Error;
};

// Decremental regime violated (non-deletion update).
class RegimeError : public Error {
 public:
  using Error::Error;
};

// A resample-until-valid loop exhausted its attempt budget.
class StatisticalError : public Error {
 public:
  using Error::Error;
};

// An internal invariant failed in slow-verify mode.
class VerifyError : public Error {
 public:
  using Error::Error;
};

}  // namespace dmr
