#ifndef REPSIM_VERSION_HPP
#define REPSIM_VERSION_HPP

namespace repsim {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace repsim

#endif  // REPSIM_VERSION_HPP
