#pragma once

namespace isle {

inline constexpr const char* kToolName = "isle";
inline constexpr const char* kToolVersion = "0.1.0";

} // namespace isle
