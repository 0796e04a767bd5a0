#pragma once

namespace actnow {

/// Keeps large Eigen temporaries on the heap instead of fresh mmap'd pages.
/// Training allocates and frees multi-megabyte activations per batch; with
/// glibc's default mmap threshold every one of them costs page faults.
/// No-op on other C libraries.
void tune_allocator();

} // namespace actnow
