#include "cliquetree/util.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>

namespace cliquetree {

std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[64];
    // %.17g is round-trip exact for IEEE doubles; glibc printf rounds
    // deterministically, so equal values always print equal bytes.
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    if (jobs <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::size_t n_workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    workers.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) {
        workers.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                fn(i);
            }
        });
    }
    for (auto& t : workers) t.join();
}

}  // namespace cliquetree
