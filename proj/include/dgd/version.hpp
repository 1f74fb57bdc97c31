#pragma once

namespace dgd {

inline constexpr const char* kToolName = "dgd";
inline constexpr const char* kVersion = "0.1.0";

}  // namespace dgd
