#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>

namespace obda {

/// A database value. Tables carry int64 or string columns only.
using Value = std::variant<std::int64_t, std::string>;

inline std::string render_value(const Value &v) {
  if (std::holds_alternative<std::int64_t>(v))
    return std::to_string(std::get<std::int64_t>(v));
  return std::get<std::string>(v);
}

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised by parsers; carries a 1-based position.
struct ParseError : Error {
  ParseError(const std::string &msg, int line, int col)
      : Error(msg + " (line " + std::to_string(line) + ", col " +
              std::to_string(col) + ")"),
        line(line), col(col) {}
  int line, col;
};

struct SchemaError : Error {
  using Error::Error;
};

/// A statistic the estimator needs is absent from the catalog. The key is
/// part of the message so provenance of an estimate is never ambiguous.
struct MissingStatError : Error {
  explicit MissingStatError(const std::string &key)
      : Error("missing statistic: " + key), key(key) {}
  std::string key;
};

struct EstimateError : Error {
  using Error::Error;
};

struct PlanError : Error {
  using Error::Error;
};

} // namespace obda
