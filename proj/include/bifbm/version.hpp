#ifndef BIFBM_VERSION_HPP
#define BIFBM_VERSION_HPP

namespace bifbm {

inline constexpr const char* kToolName = "bifbm";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace bifbm

#endif  // BIFBM_VERSION_HPP
