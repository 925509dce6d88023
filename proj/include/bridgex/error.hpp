#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace bridgex {

/// Base of every error raised by the toolkit. `kind()` is a stable,
/// machine-readable tag used by the CLI error report.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

/// Malformed text input. `location` is a 1-based line number or a 0-based
/// character offset depending on the format.
class ParseError : public Error {
public:
  ParseError(const std::string& what, std::size_t location)
      : Error("parse", what), location_(location) {}

  std::size_t location() const noexcept { return location_; }

private:
  std::size_t location_;
};

/// Structurally invalid dump / export file.
class FormatError : public Error {
public:
  explicit FormatError(const std::string& what) : Error("format", what) {}
};

class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& what) : Error("config", what) {}
};

class ValidationError : public Error {
public:
  explicit ValidationError(const std::string& what) : Error("validation", what) {}
};

class ShapeError : public Error {
public:
  explicit ShapeError(const std::string& what) : Error("shape", what) {}
};

class LookupError : public Error {
public:
  explicit LookupError(const std::string& what) : Error("lookup", what) {}
};

class IoError : public Error {
public:
  explicit IoError(const std::string& what) : Error("io", what) {}
};

/// A quantity (similarity, score) that is mathematically undefined for the
/// given input, e.g. a cosine over an all-zero vector.
class UndefinedError : public Error {
public:
  explicit UndefinedError(const std::string& what) : Error("undefined", what) {}
};

class SelectionError : public Error {
public:
  explicit SelectionError(const std::string& what) : Error("selection", what) {}
};

/// Not enough data to satisfy a precondition. `shortfall` is how many items
/// were missing, when that is known.
class InsufficientDataError : public Error {
public:
  InsufficientDataError(const std::string& what, std::size_t shortfall = 0)
      : Error("insufficient_data", what), shortfall_(shortfall) {}

  std::size_t shortfall() const noexcept { return shortfall_; }

private:
  std::size_t shortfall_;
};

/// Config validation failure carrying every problem found.
class ConfigValidationError : public Error {
public:
  explicit ConfigValidationError(std::vector<std::string> problems)
      : Error("config", join(problems)), problems_(std::move(problems)) {}

  const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
  static std::string join(const std::vector<std::string>& problems) {
    std::string out = "invalid configuration";
    for (const auto& p : problems) out += "\n  - " + p;
    return out;
  }

  std::vector<std::string> problems_;
};

}  // namespace bridgex
