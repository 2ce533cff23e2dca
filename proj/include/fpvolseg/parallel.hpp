#ifndef FPVOLSEG_PARALLEL_HPP
#define FPVOLSEG_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace fpvolseg {

// Resolves a requested worker count; 0 means the hardware default.
unsigned resolve_threads(unsigned requested);

// Runs fn(i) for every i in [0, count). Work is split statically across
// threads; fn must only write to per-index slots so results do not depend
// on the schedule. The first exception thrown by any worker is rethrown.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& fn);

} // namespace fpvolseg

#endif
