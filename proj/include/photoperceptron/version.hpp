#pragma once

namespace photoperceptron {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace photoperceptron
