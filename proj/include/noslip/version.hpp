#pragma once

namespace noslip {

inline constexpr const char* kVersion = "0.1.0";

} // namespace noslip
