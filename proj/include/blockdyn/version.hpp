#pragma once

namespace blockdyn {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace blockdyn
