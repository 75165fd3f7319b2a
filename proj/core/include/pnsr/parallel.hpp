#pragma once

#include <cstddef>
#include <functional>

namespace pnsr {

/// Process-wide cap on worker threads used inside library operations.
/// Results never depend on this value: work is split into index ranges whose
/// outputs are disjoint, and every reduction happens afterwards in fixed order.
void set_max_threads(int n);
int max_threads() noexcept;

/// Calls body(i) for every i in [0, n). Iterations must write disjoint outputs.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace pnsr
