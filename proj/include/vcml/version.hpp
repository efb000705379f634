#pragma once

namespace vcml {
inline constexpr const char* kVersion = "0.1.0";
}
