#ifndef CLIQUETREE_UTIL_HPP
#define CLIQUETREE_UTIL_HPP

#include <cstdint>
#include <cstdio>
#include <functional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace cliquetree {

// FNV-1a 64-bit. Used to stamp output artifacts with a stable content hash.
inline uint64_t fnv1a64(std::string_view bytes) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string to_hex(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return std::string(buf);
}

// Round-trip-exact text for a double; "-inf"/"inf" for infinities.
// All TSV output goes through this so repeated runs are byte-identical.
std::string format_double(double v);

// Runs fn(0..n-1) on up to `jobs` worker threads. Each index is independent;
// callers write results into pre-sized slots so the outcome does not depend
// on scheduling. jobs <= 1 degenerates to a plain loop.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

inline int default_jobs() {
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

}  // namespace cliquetree

#endif  // CLIQUETREE_UTIL_HPP
