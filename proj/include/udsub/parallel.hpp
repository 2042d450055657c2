#pragma once

#include <cstddef>
#include <functional>

namespace udsub::parallel {

/// Caps the worker count; 0 restores the default (UDSUB_THREADS, else the
/// hardware concurrency). Results never depend on this value.
void set_thread_count(unsigned n);
unsigned thread_count();

/// Calls fn(b) for every b in [0, n_blocks). Blocks are handed out
/// dynamically, so fn must only write to storage owned by its block.
void for_each_block(std::size_t n_blocks, const std::function<void(std::size_t)>& fn);

/// Sum of fn(begin, end) over fixed-size chunks of [0, n), added in chunk
/// order. The chunking is independent of the thread count, which makes the
/// result bit-reproducible.
double chunked_sum(std::size_t n, std::size_t chunk,
                   const std::function<double(std::size_t, std::size_t)>& fn);

}  // namespace udsub::parallel
