#ifndef SHIFTEQ_VERSION_HPP
#define SHIFTEQ_VERSION_HPP

namespace shifteq {

inline constexpr const char* kToolVersion = "0.1.0";

}

#endif
