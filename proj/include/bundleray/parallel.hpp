#pragma once

#include <cstddef>
#include <functional>

namespace bundleray {

// Worker count used by parallel_for. 0 selects hardware concurrency.
void set_thread_count(unsigned threads);
unsigned thread_count();

// Runs body(i) for i in [0, count). Each index must write only its own
// output slot so results do not depend on scheduling. Nested calls from a
// worker run serially. The exception of the lowest failing index is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace bundleray
