#pragma once

namespace mcdist {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mcdist
