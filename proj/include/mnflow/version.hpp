#pragma once

namespace mnflow {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mnflow
