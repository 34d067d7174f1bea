#pragma once

#include <stdexcept>
#include <string>

namespace mmwsim {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& m) : std::runtime_error(m) {}
};

struct GeometryError : std::runtime_error {
  explicit GeometryError(const std::string& m) : std::runtime_error(m) {}
};

struct CoverageError : std::runtime_error {
  explicit CoverageError(const std::string& m) : std::runtime_error(m) {}
};

struct ProtocolError : std::runtime_error {
  explicit ProtocolError(const std::string& m) : std::runtime_error(m) {}
};

// Event scheduled in the past, broken conservation, and similar faults that
// indicate a bug rather than bad input; aborts the run.
struct SimFault : std::logic_error {
  explicit SimFault(const std::string& m) : std::logic_error(m) {}
};

}  // namespace mmwsim
