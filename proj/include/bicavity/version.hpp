#pragma once

namespace bicavity {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace bicavity
