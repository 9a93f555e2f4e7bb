#pragma once

#include <stdexcept>
#include <string>

namespace dynhc {

// Base class for all recoverable library errors. Callers that only want a
// coarse "bad input vs. broken invariant" split can catch dynhc::Error and
// std::logic_error respectively: internal invariant breaches are reported as
// std::logic_error and are never part of the public contract.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed arguments: dimension mismatches, bad configuration values,
// unparsable input files.
class InputError : public Error {
 public:
  using Error::Error;
};

// A referenced point/edge/vertex does not exist.
class NotFoundError : public Error {
 public:
  using Error::Error;
};

// An id that must be fresh already exists, or an edge would be duplicated.
class ConflictError : public Error {
 public:
  using Error::Error;
};

// Not enough data to answer the query (e.g. a k-NN query with fewer than k
// candidates, or a clustering request below the minimum population).
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

// Operation not valid in the current lifecycle state (e.g. asking for an MST
// snapshot while the clusterer is below its population threshold).
class StateError : public Error {
 public:
  using Error::Error;
};

// Filesystem-level failures.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace dynhc
