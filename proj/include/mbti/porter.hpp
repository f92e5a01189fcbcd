#pragma once

#include <string>
#include <string_view>

namespace mbti::features {

/// One pass of the Porter (1980) suffix-stripping algorithm, using the rule
/// tables of the reference C implementation (including its "bli"->"ble" and
/// "logi"->"log" variants). Expects a lowercase ASCII word; anything else is
/// returned unchanged.
std::string porter_stem(std::string_view word);

}  // namespace mbti::features
