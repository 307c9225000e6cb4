#pragma once

namespace ercav {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace ercav
