#pragma once

#include <cstdint>

namespace hut {

// Exact floating-point-operation tally for the calling thread.
//
// Counting convention (documented once here, applied by every instrumented
// operation in ops.hpp):
//   * one multiply = 1, one add/subtract = 1, one divide = 1
//   * a length-m dot product costs 2m-1 (m multiplies, m-1 adds)
//   * counts are derived from operand shapes, so the tally is identical for
//     the scalar and SIMD kernel paths
//
// The counter is thread_local: concurrent sweep workers each tally their own
// operations and never share a scope.  Within a scope the count is monotonic
// and exact (no sampling); it resets only when a new scope begins.
class FlopScope {
public:
    // Starts a fresh measurement (count == 0).  Scopes are exclusive per
    // thread: constructing one while another is live throws std::logic_error,
    // so a measurement can never silently absorb an enclosing one.
    FlopScope();
    ~FlopScope();

    FlopScope(const FlopScope&) = delete;
    FlopScope& operator=(const FlopScope&) = delete;

    // Operations tallied on this thread since the scope began.
    std::uint64_t count() const;
};

namespace flops {

// Adds `n` operations to the calling thread's tally.  No-op outside a scope.
void add(std::uint64_t n) noexcept;

bool scope_active() noexcept;

}  // namespace flops
}  // namespace hut
