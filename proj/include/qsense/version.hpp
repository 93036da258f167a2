#pragma once

namespace qsense {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace qsense
