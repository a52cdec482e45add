#pragma once

#include <stdexcept>
#include <string>

namespace homa {

// Misuse of the simulation engine (e.g. scheduling an event in the past).
struct SimError : std::logic_error {
  explicit SimError(const std::string& what) : std::logic_error(what) {}
};

// Invalid run configuration; carries a human-readable location.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace homa
