// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include <stdexcept>

#include "nmd/cell_value.h"
#include "nmd/decimal.h"

using nmd::CellValue;
using nmd::Decimal;

TEST_CASE("decimal parse and print") {
  CHECK(Decimal::parse("-12.50").to_string() == "-12.5");
  CHECK(Decimal::parse(".5").to_string() == "0.5");
  CHECK(Decimal::parse("1E-3").to_string() == "0.001");
  CHECK(Decimal::parse("3").to_string() == "3");
  CHECK(Decimal::parse("1e20").to_string() == "100000000000000000000");
  CHECK_THROWS_AS(Decimal::parse("abc"), std::invalid_argument);
  CHECK_FALSE(Decimal::try_parse("1..2").has_value());
}

TEST_CASE("decimal arithmetic is exact") {
  Decimal tenth = Decimal::parse("0.1");
  CHECK(tenth + Decimal::parse("0.2") == Decimal::parse("0.3"));
  CHECK(Decimal::from_double(0.1) == tenth);
  Decimal third = Decimal(1) / Decimal(3);
  CHECK(third * Decimal(3) == Decimal(1));
  CHECK_FALSE(third.is_terminating());
  CHECK(third.to_display_string() == "0.333333333333333");
  CHECK_THROWS_AS(Decimal(1) / Decimal(0), std::domain_error);
  CHECK(Decimal::parse("2.5") < Decimal(3));
  CHECK((-Decimal(2)).is_negative());
}

TEST_CASE("cell value display") {
  CHECK(CellValue::number(Decimal::parse("10")).to_display() == "10");
  CHECK(CellValue::boolean(true).to_display() == "TRUE");
  CHECK(CellValue::text("x").to_display() == "x");
  CHECK(CellValue::blank().to_display().empty());
  CHECK(CellValue::error(nmd::error_code::kDivZero).to_display() == "#DIV/0!");
  CHECK(CellValue::number(1) != CellValue::text("1"));
}
