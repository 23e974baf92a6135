#pragma once

namespace proxycal {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace proxycal
