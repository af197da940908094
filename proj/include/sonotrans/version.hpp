#pragma once

namespace sonotrans {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace sonotrans
