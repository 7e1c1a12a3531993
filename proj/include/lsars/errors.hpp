#pragma once

#include <stdexcept>
#include <string>

namespace lsars {

// Input file problems (check-in files, lexicon files): CLI exit 2.
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Model file problems (save/load/validation): CLI exit 2.
struct ModelIoError : std::runtime_error {
  explicit ModelIoError(const std::string& what) : std::runtime_error(what) {}
};

// Invalid hyperparameters or run configuration: CLI exit 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Query referencing an unknown user or item: CLI exit 3.
struct QueryError : std::runtime_error {
  explicit QueryError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lsars
