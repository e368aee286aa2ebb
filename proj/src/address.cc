// SPDX-License-Identifier: Apache-2.0
#include "nmd/address.h"

#include <cctype>

#include "nmd/errors.h"

namespace nmd {

std::optional<int> column_index(std::string_view letters) {
  if (letters.empty() || letters.size() > 2) return std::nullopt;
  int index = 0;
  for (char c : letters) {
    if (!std::isalpha(static_cast<unsigned char>(c))) return std::nullopt;
    index = index * 26 + (std::toupper(static_cast<unsigned char>(c)) - 'A' + 1);
  }
  return index;
}

std::string column_letters(int index) {
  std::string out;
  while (index > 0) {
    int rem = (index - 1) % 26;
    out.insert(out.begin(), static_cast<char>('A' + rem));
    index = (index - 1) / 26;
  }
  return out;
}

std::string to_upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::toupper(static_cast<unsigned char>(a[i])) !=
        std::toupper(static_cast<unsigned char>(b[i]))) {
      return false;
    }
  }
  return true;
}

std::string quote_sheet_for_a1(std::string_view sheet) {
  bool plain = !sheet.empty() &&
               !std::isdigit(static_cast<unsigned char>(sheet.front()));
  for (char c : sheet) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') plain = false;
  }
  if (plain) return std::string(sheet);
  std::string out = "'";
  for (char c : sheet) {
    out += c;
    if (c == '\'') out += '\'';
  }
  return out + "'";
}

std::string CellAddress::a1() const {
  return column_letters(column) + std::to_string(row);
}

std::string CellAddress::to_string() const {
  return quote_sheet_for_a1(sheet) + "!" + a1();
}

std::optional<std::pair<int, int>> parse_cell_a1(std::string_view a1) {
  std::size_t i = 0;
  while (i < a1.size() && std::isalpha(static_cast<unsigned char>(a1[i]))) ++i;
  auto col = column_index(a1.substr(0, i));
  if (!col) return std::nullopt;
  if (i == a1.size() || a1[i] == '0') return std::nullopt;
  long row = 0;
  for (std::size_t j = i; j < a1.size(); ++j) {
    if (!std::isdigit(static_cast<unsigned char>(a1[j]))) return std::nullopt;
    row = row * 10 + (a1[j] - '0');
    if (row > kMaxRow) return std::nullopt;
  }
  return std::make_pair(*col, static_cast<int>(row));
}

CellAddress parse_cell_address(std::string_view text) {
  std::string sheet;
  std::size_t pos = 0;
  if (!text.empty() && text.front() == '\'') {
    std::size_t i = 1;
    for (; i < text.size(); ++i) {
      if (text[i] == '\'') {
        if (i + 1 < text.size() && text[i + 1] == '\'') {
          sheet += '\'';
          ++i;
          continue;
        }
        break;
      }
      sheet += text[i];
    }
    if (i >= text.size() || i + 1 >= text.size() || text[i + 1] != '!') {
      throw Error("malformed cell address '" + std::string(text) + "'");
    }
    pos = i + 2;
  } else {
    auto bang = text.find('!');
    if (bang == std::string_view::npos) {
      throw Error("cell address needs a sheet prefix: '" + std::string(text) +
                  "'");
    }
    sheet = std::string(text.substr(0, bang));
    pos = bang + 1;
  }
  std::string a1;
  for (char c : text.substr(pos)) {
    if (c != '$') a1 += c;
  }
  auto parsed = parse_cell_a1(a1);
  if (sheet.empty() || !parsed) {
    throw Error("malformed cell address '" + std::string(text) + "'");
  }
  return CellAddress{to_upper(sheet), parsed->first, parsed->second};
}

}  // namespace nmd
