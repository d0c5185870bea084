#pragma once

#include <string>
#include <string_view>

namespace wordorder {

// Unicode default case folding (ICU, U_FOLD_CASE_DEFAULT) of UTF-8 input.
// Invalid UTF-8 bytes pass through unchanged.
std::string fold_case(std::string_view utf8);

}  // namespace wordorder
