// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nmd::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kFindings = 1;  // validation findings or differences
inline constexpr int kError = 2;

// `args` excludes the program name. `in` feeds the interactive walk.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err);

}  // namespace nmd::cli
