#pragma once

#include <cstddef>
#include <exception>
#include <functional>

namespace censtl {

/// Worker cap for library-internal parallel loops; 0 means hardware concurrency.
void set_max_threads(std::size_t threads);
std::size_t max_threads();

/// Runs body(i) for i in [0, n) on up to max_threads() workers. Each index is
/// visited exactly once; the first exception (lowest index) is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace censtl
