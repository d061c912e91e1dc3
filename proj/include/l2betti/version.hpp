#pragma once

#include <string_view>

namespace l2betti {

inline constexpr std::string_view kVersion = "0.1.0";

}  // namespace l2betti
