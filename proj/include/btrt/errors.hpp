#pragma once

#include <stdexcept>
#include <string>

namespace btrt {

/// Bad user input: malformed rankings, inconsistent sizes, broken region sets.
/// The CLI maps these to exit code 2.
class validation_error : public std::runtime_error {
public:
  explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

/// Exact enumeration requested beyond the supported object count (n_o > 8).
class unsupported_size_error : public validation_error {
public:
  explicit unsupported_size_error(const std::string& what) : validation_error(what) {}
};

/// Numerical failure while fitting. The CLI maps these to exit code 3.
class numerical_error : public std::runtime_error {
public:
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

/// A coefficient diverged past the log-odds cap; the likelihood has no
/// finite maximizer (quasi-complete separation).
class separation_error : public numerical_error {
public:
  separation_error(const std::string& column, double value)
      : numerical_error("separation detected: coefficient for column '" + column +
                        "' exceeded cap (estimate " + std::to_string(value) + ")"),
        column_(column) {}
  const std::string& column() const { return column_; }

private:
  std::string column_;
};

/// Linearly dependent design columns in a strict fit.
class rank_deficiency_error : public numerical_error {
public:
  explicit rank_deficiency_error(const std::string& column)
      : numerical_error("rank-deficient design: column '" + column +
                        "' is linearly dependent on earlier columns"),
        column_(column) {}
  const std::string& column() const { return column_; }

private:
  std::string column_;
};

/// No valid cross-validation entry to select from.
class selection_error : public numerical_error {
public:
  explicit selection_error(const std::string& what) : numerical_error(what) {}
};

}  // namespace btrt
