#include "xmodal/parallel.hpp"

#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace xmodal {

namespace {

int resolve_threads() {
#ifdef _OPENMP
    int available = omp_get_max_threads();
#else
    int available = 1;
#endif
    if (const char* env = std::getenv("XMODAL_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) {
            return static_cast<int>(v);
        }
    }
    return available;
}

}  // namespace

int worker_threads() {
    static const int n = resolve_threads();
    return n;
}

}  // namespace xmodal
