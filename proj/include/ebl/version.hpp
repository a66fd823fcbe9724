#pragma once

namespace ebl {

inline constexpr const char* version = "0.1.0";

}  // namespace ebl
