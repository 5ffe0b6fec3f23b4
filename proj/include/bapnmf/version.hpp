#pragma once

namespace bapnmf {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace bapnmf
