#pragma once

#include <cstddef>
#include <functional>

namespace spectral::detail {

// Runs fn(i) for every i in [0, count) across a few worker threads. Callers
// must write results to disjoint locations; with that contract the outcome is
// identical to the serial loop regardless of thread count or scheduling.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

// Partitions [0, count) into exactly `chunks` contiguous ranges and runs
// fn(chunk, begin, end) for each, possibly concurrently. Within a chunk the
// range is processed by one worker in order, so per-chunk accumulations are
// deterministic; callers reduce the chunk buffers in chunk order afterward.
void parallel_chunks(std::size_t count, std::size_t chunks,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

}  // namespace spectral::detail
