#pragma once

#include <stdexcept>
#include <string>

namespace gsmap {

/// Malformed or inconsistent external data (files, archives, parses).
class DataError : public std::runtime_error {
public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// A map/query invariant that should be unreachable was violated.
class InvariantError : public std::logic_error {
public:
  explicit InvariantError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace gsmap
