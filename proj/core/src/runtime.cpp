#include "actnow/runtime.hpp"

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace actnow {

void tune_allocator() {
#if defined(__GLIBC__)
    // glibc rejects mmap thresholds above 32 MiB on 64-bit targets.
    mallopt(M_MMAP_THRESHOLD, 32 * 1024 * 1024);
    mallopt(M_TRIM_THRESHOLD, 512 * 1024 * 1024);
    mallopt(M_TOP_PAD, 64 * 1024 * 1024);
#endif
}

} // namespace actnow
