#pragma once

#include <cstddef>
#include <functional>

namespace lh {

/// Number of worker threads used by parallel_for. Defaults to 1.
void set_num_threads(unsigned n);
unsigned num_threads();

/// Runs body(i) for i in [0, n). Each index is visited exactly once; bodies
/// must only write to state owned by their index so results do not depend
/// on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace lh
