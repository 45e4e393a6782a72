#pragma once

namespace tabgraph {

inline constexpr const char* kToolName = "tabgraph";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace tabgraph
