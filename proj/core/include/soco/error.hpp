#pragma once

#include <stdexcept>
#include <string>

namespace soco {

// Base of every error the library raises. `kind()` is a stable, machine
// readable tag used by the command-line front end.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual const char* kind() const noexcept { return "runtime"; }
};

class ShapeError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "shape"; }
};

class NonFiniteError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "non_finite"; }
};

class ConfigError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "config"; }
};

class MissingArtifactError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "missing_artifact"; }
};

class FormatError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "format"; }
};

class FrozenPolicyError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "frozen_policy"; }
};

class HashMismatchError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "hash_mismatch"; }
};

}  // namespace soco
