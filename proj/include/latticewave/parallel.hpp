#pragma once

#include <cstddef>
#include <functional>

namespace latticewave {

// Caps the width of parallel maps; 0 means hardware concurrency.
void set_worker_count(int workers);
int worker_count();

// Runs body(i) for i in [0, n). Each index must write only its own output
// slot, which keeps results independent of scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace latticewave
