// SPDX-License-Identifier: Apache-2.0
#include "nmd/decimal.h"

#include <array>
#include <cctype>
#include <charconv>
#include <limits>
#include <stdexcept>

namespace nmd {

namespace {

using boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

cpp_int pow10(unsigned n) {
  cpp_int r = 1;
  for (unsigned i = 0; i < n; ++i) r *= 10;
  return r;
}

Rational pow10_rational(int e) {
  if (e >= 0) return Rational(pow10(static_cast<unsigned>(e)));
  return Rational(cpp_int(1), pow10(static_cast<unsigned>(-e)));
}

}  // namespace

std::optional<Decimal> Decimal::try_parse(std::string_view text) {
  std::size_t i = 0;
  bool negative = false;
  if (i < text.size() && (text[i] == '-' || text[i] == '+')) {
    negative = text[i] == '-';
    ++i;
  }
  cpp_int mantissa = 0;
  int scale = 0;
  bool any_digit = false;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
    mantissa = mantissa * 10 + (text[i] - '0');
    any_digit = true;
    ++i;
  }
  if (i < text.size() && text[i] == '.') {
    ++i;
    while (i < text.size() &&
           std::isdigit(static_cast<unsigned char>(text[i]))) {
      mantissa = mantissa * 10 + (text[i] - '0');
      ++scale;
      any_digit = true;
      ++i;
    }
  }
  if (!any_digit) return std::nullopt;
  int exponent = 0;
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    bool exp_negative = false;
    if (i < text.size() && (text[i] == '-' || text[i] == '+')) {
      exp_negative = text[i] == '-';
      ++i;
    }
    bool exp_digit = false;
    while (i < text.size() &&
           std::isdigit(static_cast<unsigned char>(text[i]))) {
      exponent = exponent * 10 + (text[i] - '0');
      if (exponent > 100000) return std::nullopt;
      exp_digit = true;
      ++i;
    }
    if (!exp_digit) return std::nullopt;
    if (exp_negative) exponent = -exponent;
  }
  if (i != text.size()) return std::nullopt;
  Rational value(mantissa);
  value *= pow10_rational(exponent - scale);
  if (negative) value = -value;
  return Decimal(std::move(value));
}

Decimal Decimal::parse(std::string_view text) {
  auto d = try_parse(text);
  if (!d) {
    throw std::invalid_argument("not a decimal number: '" + std::string(text) +
                                "'");
  }
  return *d;
}

Decimal Decimal::from_double(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw std::invalid_argument("unrepresentable double");
  return parse(std::string_view(buf.data(), end - buf.data()));
}

double Decimal::to_double() const {
  return std::stod(format_rounded(17));
}

bool Decimal::is_integer() const {
  return boost::multiprecision::denominator(value_) == 1;
}

std::optional<std::int64_t> Decimal::to_int64() const {
  if (!is_integer()) return std::nullopt;
  const cpp_int& n = boost::multiprecision::numerator(value_);
  if (n > std::numeric_limits<std::int64_t>::max() ||
      n < std::numeric_limits<std::int64_t>::min()) {
    return std::nullopt;
  }
  return static_cast<std::int64_t>(n);
}

bool Decimal::is_terminating() const {
  cpp_int d = boost::multiprecision::denominator(value_);
  while (d % 2 == 0) d /= 2;
  while (d % 5 == 0) d /= 5;
  return d == 1;
}

std::string Decimal::to_string() const {
  if (!is_terminating()) return to_display_string();
  // Exact expansion: scale the denominator up to a power of ten.
  cpp_int num = boost::multiprecision::numerator(value_);
  cpp_int den = boost::multiprecision::denominator(value_);
  unsigned scale = 0;
  while (den != 1) {
    cpp_int t = pow10(scale);
    if (t % den == 0) break;
    ++scale;
  }
  if (den != 1) num = num * (pow10(scale) / den);
  bool negative = num < 0;
  if (negative) num = -num;
  std::string digits = num.str();
  if (scale > 0) {
    if (digits.size() <= scale) {
      digits.insert(0, scale - digits.size() + 1, '0');
    }
    digits.insert(digits.size() - scale, ".");
  }
  return negative ? "-" + digits : digits;
}

std::string Decimal::to_display_string() const { return format_rounded(15); }

std::string Decimal::format_rounded(int significant_digits) const {
  if (value_ == 0) return "0";
  Rational magnitude = value_ < 0 ? Rational(-value_) : value_;
  // Decimal exponent e with 10^e <= magnitude < 10^(e+1).
  int e = static_cast<int>(
              boost::multiprecision::numerator(magnitude).str().size()) -
          static_cast<int>(
              boost::multiprecision::denominator(magnitude).str().size());
  while (pow10_rational(e) > magnitude) --e;
  while (pow10_rational(e + 1) <= magnitude) ++e;

  int shift = significant_digits - 1 - e;
  Rational scaled = magnitude * pow10_rational(shift);
  cpp_int q = boost::multiprecision::numerator(scaled) /
              boost::multiprecision::denominator(scaled);
  Rational frac = scaled - Rational(q);
  if (frac * 2 >= 1) q += 1;  // half away from zero
  if (q == pow10(static_cast<unsigned>(significant_digits))) {
    q /= 10;
    --shift;
  }
  std::string digits = q.str();
  // value = digits * 10^-shift
  std::string out;
  if (shift <= 0) {
    out = digits + std::string(static_cast<std::size_t>(-shift), '0');
  } else if (static_cast<std::size_t>(shift) >= digits.size()) {
    out = "0." + std::string(shift - digits.size(), '0') + digits;
  } else {
    out = digits;
    out.insert(out.size() - shift, ".");
  }
  if (out.find('.') != std::string::npos) {
    while (out.back() == '0') out.pop_back();
    if (out.back() == '.') out.pop_back();
  }
  return value_ < 0 ? "-" + out : out;
}

Decimal Decimal::operator-() const { return Decimal(Rational(-value_)); }

Decimal operator+(const Decimal& a, const Decimal& b) {
  return Decimal(Decimal::Rational(a.value_ + b.value_));
}
Decimal operator-(const Decimal& a, const Decimal& b) {
  return Decimal(Decimal::Rational(a.value_ - b.value_));
}
Decimal operator*(const Decimal& a, const Decimal& b) {
  return Decimal(Decimal::Rational(a.value_ * b.value_));
}
Decimal operator/(const Decimal& a, const Decimal& b) {
  if (b.value_ == 0) throw std::domain_error("division by zero");
  return Decimal(Decimal::Rational(a.value_ / b.value_));
}

std::strong_ordering operator<=>(const Decimal& a, const Decimal& b) {
  if (a.value_ < b.value_) return std::strong_ordering::less;
  if (a.value_ > b.value_) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

}  // namespace nmd
