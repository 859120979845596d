#pragma once

namespace soficspin {
inline constexpr const char* kVersion = "0.1.0";
}
