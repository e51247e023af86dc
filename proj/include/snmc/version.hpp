#pragma once

namespace snmc {

inline constexpr const char* kVersion = "0.1.0";

} // namespace snmc
