#pragma once

namespace tic {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace tic
