// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <variant>

#include "nmd/decimal.h"

namespace nmd {

struct Blank {
  friend bool operator==(const Blank&, const Blank&) = default;
};

struct ErrorValue {
  std::string code;  // "#VALUE!", "#DIV/0!", ...
  friend bool operator==(const ErrorValue&, const ErrorValue&) = default;
};

namespace error_code {
inline constexpr const char* kValue = "#VALUE!";
inline constexpr const char* kDivZero = "#DIV/0!";
inline constexpr const char* kName = "#NAME?";
inline constexpr const char* kRef = "#REF!";
}  // namespace error_code

class CellValue {
 public:
  enum class Kind { Blank, Number, Boolean, Text, Error };

  CellValue() = default;
  static CellValue blank() { return CellValue(); }
  static CellValue number(Decimal d) { return CellValue(Storage(std::move(d))); }
  static CellValue boolean(bool b) { return CellValue(Storage(b)); }
  static CellValue text(std::string s) { return CellValue(Storage(std::move(s))); }
  static CellValue error(std::string code) {
    return CellValue(Storage(ErrorValue{std::move(code)}));
  }

  Kind kind() const { return static_cast<Kind>(storage_.index()); }
  bool is_blank() const { return kind() == Kind::Blank; }
  bool is_number() const { return kind() == Kind::Number; }
  bool is_boolean() const { return kind() == Kind::Boolean; }
  bool is_text() const { return kind() == Kind::Text; }
  bool is_error() const { return kind() == Kind::Error; }

  const Decimal& as_number() const { return std::get<Decimal>(storage_); }
  bool as_boolean() const { return std::get<bool>(storage_); }
  const std::string& as_text() const { return std::get<std::string>(storage_); }
  const std::string& error_code() const {
    return std::get<ErrorValue>(storage_).code;
  }

  // Spreadsheet-style rendering: numbers to 15 significant digits,
  // TRUE/FALSE, raw text, empty for blank, the code for errors.
  std::string to_display() const;

  friend bool operator==(const CellValue&, const CellValue&) = default;

 private:
  using Storage = std::variant<Blank, Decimal, bool, std::string, ErrorValue>;
  explicit CellValue(Storage s) : storage_(std::move(s)) {}
  Storage storage_;
};

}  // namespace nmd
