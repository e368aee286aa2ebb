// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace nmd {

// Exact rational number used for every numeric cell value. Literals are
// always terminating decimals; division may produce non-terminating
// values, which stay exact until rendered.
class Decimal {
 public:
  Decimal() = default;
  Decimal(std::int64_t v) : value_(v) {}  // NOLINT(google-explicit-constructor)

  // Accepts `-12.50`, `3`, `.5`, `1E-3`. Throws std::invalid_argument.
  static Decimal parse(std::string_view text);
  static std::optional<Decimal> try_parse(std::string_view text);

  // Converts through the shortest decimal string that round-trips the
  // double, so 0.1 becomes exactly 1/10.
  static Decimal from_double(double v);

  double to_double() const;
  bool is_integer() const;
  std::optional<std::int64_t> to_int64() const;
  bool is_zero() const { return value_ == 0; }
  bool is_negative() const { return value_ < 0; }
  bool is_terminating() const;

  // Exact text when the expansion terminates, otherwise the 15-digit
  // display form. Never uses exponent notation.
  std::string to_string() const;
  // Rounded to 15 significant digits, trailing zeros trimmed.
  std::string to_display_string() const;

  Decimal operator-() const;
  friend Decimal operator+(const Decimal& a, const Decimal& b);
  friend Decimal operator-(const Decimal& a, const Decimal& b);
  friend Decimal operator*(const Decimal& a, const Decimal& b);
  // Throws std::domain_error on division by zero.
  friend Decimal operator/(const Decimal& a, const Decimal& b);

  friend bool operator==(const Decimal& a, const Decimal& b) {
    return a.value_ == b.value_;
  }
  friend std::strong_ordering operator<=>(const Decimal& a, const Decimal& b);

 private:
  using Rational = boost::multiprecision::cpp_rational;
  explicit Decimal(Rational v) : value_(std::move(v)) {}
  std::string format_rounded(int significant_digits) const;

  Rational value_{0};
};

}  // namespace nmd
