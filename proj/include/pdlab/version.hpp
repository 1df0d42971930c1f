#pragma once

namespace pdlab {
inline constexpr const char* kToolVersion = "pdlab 0.1.0";
}
