#ifndef CLIQUETREE_VERSION_HPP
#define CLIQUETREE_VERSION_HPP

namespace cliquetree {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace cliquetree

#endif  // CLIQUETREE_VERSION_HPP
