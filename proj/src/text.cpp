#include "wordorder/text.hpp"

#include <unicode/stringoptions.h>
#include <unicode/unistr.h>

namespace wordorder {

std::string fold_case(std::string_view utf8) {
  icu::UnicodeString s = icu::UnicodeString::fromUTF8(
      icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  s.foldCase(U_FOLD_CASE_DEFAULT);
  std::string out;
  s.toUTF8String(out);
  return out;
}

}  // namespace wordorder
