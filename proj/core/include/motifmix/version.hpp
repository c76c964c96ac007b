#ifndef MOTIFMIX_VERSION_HPP
#define MOTIFMIX_VERSION_HPP

namespace motifmix {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace motifmix

#endif  // MOTIFMIX_VERSION_HPP
