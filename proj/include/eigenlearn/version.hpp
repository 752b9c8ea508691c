#pragma once

namespace eigenlearn {
inline constexpr const char* kVersion = "0.1.0";
}
