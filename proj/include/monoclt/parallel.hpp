#pragma once

#include <cstddef>
#include <functional>

namespace monoclt {

/// Worker count: MONOCLT_THREADS when set, otherwise the hardware count.
std::size_t thread_count() noexcept;

/// Runs body(begin, end) over contiguous chunks of [0, n) on up to
/// thread_count() threads. Exceptions from workers are rethrown.
void parallel_for(std::size_t n, std::size_t min_chunk,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace monoclt
