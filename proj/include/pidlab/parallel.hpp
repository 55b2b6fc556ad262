#pragma once

#include <cstddef>
#include <functional>
#include <optional>

namespace pidlab {

/// Worker count: `requested` if set, else PIDLAB_WORKERS, else the number of
/// hardware threads. Throws ConfigError for 0 or a malformed PIDLAB_WORKERS.
std::size_t resolve_workers(std::optional<std::size_t> requested = std::nullopt);

/// Calls fn(begin, end) over [0, n) split into contiguous chunks of at most
/// `chunk` items, on up to `workers` threads. The first exception thrown by
/// any chunk is rethrown after all threads join.
void parallel_chunks(std::size_t n, std::size_t chunk, std::size_t workers,
                     const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace pidlab
