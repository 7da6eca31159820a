#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace traffnet {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A caller broke a documented precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// A NaN or Inf appeared in a computed value.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Input data failed validation (bad ids, negative demand, bad event window).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A structure exceeds a configured size limit (e.g. a path longer than the
/// padded embedding can hold).
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Malformed file contents. Carries the 1-based line (0 when unknown) and
/// the offending field name.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::string field)
      : Error(format(what, line, field)), line_(line), field_(std::move(field)) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  static std::string format(const std::string& what, std::size_t line,
                            const std::string& field) {
    std::string out = "parse error";
    if (line > 0) out += " at line " + std::to_string(line);
    if (!field.empty()) out += " (field '" + field + "')";
    return out + ": " + what;
  }

  std::size_t line_;
  std::string field_;
};

}  // namespace traffnet
