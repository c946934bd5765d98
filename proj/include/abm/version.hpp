#pragma once

namespace abm {
inline constexpr const char* kVersion = "0.1.0";
}
