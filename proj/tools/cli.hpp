#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace segfuse::cli {

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitInternal = 4;

/// Runs one command line (without the program name). Reports go to `out`;
/// structured JSON errors go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Header-keyed CSV rows as JSON objects. Numeric fields become numbers and
/// empty fields become null.
nlohmann::json csv_to_json(std::string_view csv);

}  // namespace segfuse::cli
