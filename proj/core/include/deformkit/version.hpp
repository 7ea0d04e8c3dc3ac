#pragma once

namespace deformkit {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace deformkit
