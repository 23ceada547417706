#pragma once

namespace ntl {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace ntl
