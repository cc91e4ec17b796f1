#pragma once

namespace binlat {

inline constexpr const char* kVersion = "0.1.0";

// Bumped whenever the JSON artifact layout changes shape.
inline constexpr int kArtifactFormatVersion = 1;

}  // namespace binlat
