#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace sigrule {

class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or empty dataset. Carries 1-based row/column when known.
class load_error : public error {
 public:
  explicit load_error(const std::string& what, std::optional<std::size_t> row = std::nullopt,
                      std::optional<std::size_t> column = std::nullopt)
      : error(decorate(what, row, column)), row_(row), column_(column) {}

  std::optional<std::size_t> row() const noexcept { return row_; }
  std::optional<std::size_t> column() const noexcept { return column_; }

 private:
  static std::string decorate(const std::string& what, std::optional<std::size_t> row,
                              std::optional<std::size_t> column) {
    std::string out = what;
    if (row) out += " (row " + std::to_string(*row);
    if (row && column) out += ", column " + std::to_string(*column);
    if (row) out += ")";
    return out;
  }

  std::optional<std::size_t> row_;
  std::optional<std::size_t> column_;
};

/// Caller violated a precondition: unknown attribute, parameter out of range.
class usage_error : public error {
 public:
  using error::error;
};

/// The measure has no value on this table, e.g. a degenerate marginal.
class undefined_measure : public error {
 public:
  using error::error;
};

/// A synthetic family parameter lies outside its legality window.
class construction_error : public usage_error {
 public:
  using usage_error::usage_error;
};

}  // namespace sigrule
