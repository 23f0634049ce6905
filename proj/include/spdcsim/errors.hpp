#pragma once

#include <stdexcept>
#include <string>

namespace spdcsim {

/// Raised when a matrix that must be positive definite for a physical state
/// fails to factorize, or a probability leaves [0,1] by more than the
/// clamping tolerance. Indicates upstream state corruption, not user error.
class numerical_degeneracy_error : public std::runtime_error {
 public:
  explicit numerical_degeneracy_error(const std::string& what)
      : std::runtime_error(what) {}
};

/// Raised when a visibility denominator is zero (e.g. mu = 0 with no dark
/// counts), so the visibility is undefined rather than 0.
class undefined_visibility_error : public std::runtime_error {
 public:
  explicit undefined_visibility_error(const std::string& what)
      : std::runtime_error(what) {}
};

/// Circuit-file syntax or validation failure with source location.
class parse_error : public std::runtime_error {
 public:
  parse_error(int line, int column, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ", column " +
                           std::to_string(column) + ": " + message),
        line_(line),
        column_(column),
        message_(message) {}

  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& message() const { return message_; }

 private:
  int line_;
  int column_;
  std::string message_;
};

}  // namespace spdcsim
