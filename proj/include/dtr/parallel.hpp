#pragma once

#include <cstddef>

namespace dtr {

/// Execution mode of the data-parallel kernels. Serial is the reference
/// implementation; Parallel runs the same loop body under OpenMP. Every
/// kernel writes each work item to its own slot, so both modes produce
/// bit-identical results and the tests assert that.
enum class ExecMode { Serial, Parallel };

template <typename Body>
void parallel_for(std::size_t n, ExecMode mode, Body&& body) {
  if (mode == ExecMode::Serial) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
#pragma omp parallel for schedule(dynamic, 8)
  for (std::size_t i = 0; i < n; ++i) body(i);
}

}  // namespace dtr
