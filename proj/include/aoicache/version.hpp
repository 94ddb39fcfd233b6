#pragma once

namespace aoicache {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace aoicache
