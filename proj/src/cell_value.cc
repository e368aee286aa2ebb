// SPDX-License-Identifier: Apache-2.0
#include "nmd/cell_value.h"

namespace nmd {

std::string CellValue::to_display() const {
  switch (kind()) {
    case Kind::Blank:
      return "";
    case Kind::Number:
      return as_number().to_display_string();
    case Kind::Boolean:
      return as_boolean() ? "TRUE" : "FALSE";
    case Kind::Text:
      return as_text();
    case Kind::Error:
      return error_code();
  }
  return "";
}

}  // namespace nmd
