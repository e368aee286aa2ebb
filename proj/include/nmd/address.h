// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace nmd {

inline constexpr int kMaxColumn = 702;       // ZZ
inline constexpr int kMaxRow = 1048576;

// "A" -> 1, "ZZ" -> 702. Case-insensitive. nullopt when out of A..ZZ.
std::optional<int> column_index(std::string_view letters);
std::string column_letters(int index);

std::string to_upper(std::string_view s);
bool iequals(std::string_view a, std::string_view b);

// Sheet prefix for A1 references; quoted when the name is not a plain
// identifier.
std::string quote_sheet_for_a1(std::string_view upper_sheet);

// A single cell on a sheet. The sheet is held in canonical uppercase so that
// addresses compare case-insensitively.
struct CellAddress {
  std::string sheet;
  int column = 1;
  int row = 1;

  std::string a1() const;          // "B5"
  std::string to_string() const;   // "SHEET!B5"

  friend bool operator==(const CellAddress&, const CellAddress&) = default;
  friend auto operator<=>(const CellAddress&, const CellAddress&) = default;
};

// "B5" -> (column, row); no "$" markers allowed.
std::optional<std::pair<int, int>> parse_cell_a1(std::string_view a1);

// "SHEET!B5" or "'My Sheet'!B5"; "$" markers are tolerated and dropped.
// Throws nmd::Error when malformed.
CellAddress parse_cell_address(std::string_view text);

}  // namespace nmd
