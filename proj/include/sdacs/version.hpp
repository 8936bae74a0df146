#pragma once

namespace sdacs {

inline constexpr const char* kToolkitVersion = "1.0.0";

}  // namespace sdacs
