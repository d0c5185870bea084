#pragma once

#include <stdexcept>
#include <string>

namespace wordorder {

// Malformed or inconsistent input data (bad CoNLL-U record, misaligned
// surprisal file, missing artifact). CLI exit code 2.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Bad configuration detected before any streaming starts (missing resource,
// unknown variant, invalid ratios). CLI exit code 1.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A caller or callback broke an API contract (ordering function returned a
// non-permutation, metric called outside its domain). CLI exit code 3.
class ContractError : public std::logic_error {
 public:
  explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace wordorder
