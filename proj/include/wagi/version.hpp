#pragma once

namespace wagi {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace wagi
